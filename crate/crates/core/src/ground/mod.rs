//! Instantiation of operators into ground actions over dense fact ids.

mod index;
mod store;
mod zobrist;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::abstraction::{partition_predicates, PredicatePartition};
use crate::macros::MacroOperator;
use crate::pddl::{Atom, Domain, Operator, PlanAction, Problem};

pub use index::{build_fact_index, FactIndex};
pub use store::InitialFactStore;
pub use zobrist::{ZobristTable, DEFAULT_ZOBRIST_SEED};

pub type FactId = usize;

/// Default maximum number of ground actions.
pub const DEFAULT_ACTION_CAP: usize = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroundError {
    #[error("more than {cap} ground actions")]
    TooManyActions { cap: usize },
}

/// Dense ids for ground atoms, assigned in order of first use.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactTable {
    atoms: Vec<Atom>,
    ids: HashMap<Atom, FactId>,
}

impl FactTable {
    pub fn intern(&mut self, atom: Atom) -> FactId {
        if let Some(&id) = self.ids.get(&atom) {
            return id;
        }
        let id = self.atoms.len();
        self.ids.insert(atom.clone(), id);
        self.atoms.push(atom);
        id
    }

    pub fn id(&self, atom: &Atom) -> Option<FactId> {
        self.ids.get(atom).copied()
    }

    pub fn atom(&self, id: FactId) -> &Atom {
        &self.atoms[id]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// An operator instance. Static preconditions are already checked and removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub id: usize,
    pub operator: String,
    pub args: Vec<String>,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
    pub is_macro: bool,
    /// Primitive steps of a macro action; empty otherwise.
    pub primitive_expansion: Vec<PlanAction>,
}

impl GroundAction {
    pub fn plan_action(&self) -> PlanAction {
        PlanAction {
            name: self.operator.clone(),
            args: self.args.clone(),
        }
    }

    /// Number of primitive actions this action stands for.
    pub fn primitive_len(&self) -> usize {
        if self.is_macro {
            self.primitive_expansion.len()
        } else {
            1
        }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.plan_action())
    }
}

#[derive(Debug, Clone)]
pub struct GroundingOptions {
    pub cap: usize,
    pub zobrist_seed: u64,
    /// Macros compiled into the domain, keyed by operator name; these ground as macro actions.
    pub macros: BTreeMap<String, MacroOperator>,
}

impl Default for GroundingOptions {
    fn default() -> Self {
        GroundingOptions {
            cap: DEFAULT_ACTION_CAP,
            zobrist_seed: DEFAULT_ZOBRIST_SEED,
            macros: BTreeMap::new(),
        }
    }
}

/// A grounded planning task.
#[derive(Debug, Clone)]
pub struct Task {
    pub facts: FactTable,
    pub actions: Vec<GroundAction>,
    /// Fluent initial facts, sorted.
    pub init: Vec<FactId>,
    pub goal: Vec<FactId>,
    pub index: FactIndex,
    pub zobrist: ZobristTable,
    pub init_store: InitialFactStore,
    pub partition: PredicatePartition,
    /// A static goal fact is false in the initial state.
    pub static_goal_violated: bool,
}

impl Task {
    pub fn n_facts(&self) -> usize {
        self.facts.len()
    }

    /// Ground actions per operator name, in id order.
    pub fn action_counts(&self) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for a in &self.actions {
            *m.entry(a.operator.as_str()).or_default() += 1;
        }
        m
    }
}

struct OperatorGrounder<'a> {
    op: &'a Operator,
    candidates: Vec<Vec<&'a str>>,
    /// Static preconditions checked once parameter `i` is bound.
    static_at: Vec<Vec<&'a Atom>>,
    injective: bool,
}

impl<'a> OperatorGrounder<'a> {
    fn new(op: &'a Operator, prob: &'a Problem, dom: &Domain, part: &PredicatePartition, injective: bool) -> Self {
        let candidates = op
            .params
            .iter()
            .map(|p| {
                prob.objects
                    .iter()
                    .filter(|o| dom.hierarchy.is_subtype(&o.ty, &p.ty))
                    .map(|o| o.name.as_str())
                    .collect()
            })
            .collect();
        let mut static_at = vec![Vec::new(); op.params.len().max(1)];
        for a in op.pre.iter().filter(|a| part.is_static(&a.predicate)) {
            let last = a
                .args
                .iter()
                .filter_map(|x| op.params.iter().position(|p| &p.name == x))
                .max()
                .unwrap_or(0);
            static_at[last].push(a);
        }
        OperatorGrounder {
            op,
            candidates,
            static_at,
            injective,
        }
    }

    fn run(&self, store: &InitialFactStore, cap: usize, found: &mut usize, out: &mut Vec<Vec<&'a str>>) -> Result<(), GroundError> {
        if self.op.params.is_empty() {
            if self.static_at[0].iter().all(|a| store.contains(a)) {
                *found += 1;
                out.push(Vec::new());
            }
            return Ok(());
        }
        let mut binding: Vec<&str> = Vec::with_capacity(self.op.params.len());
        self.rec(store, cap, found, &mut binding, out)
    }

    fn rec(
        &self,
        store: &InitialFactStore,
        cap: usize,
        found: &mut usize,
        binding: &mut Vec<&'a str>,
        out: &mut Vec<Vec<&'a str>>,
    ) -> Result<(), GroundError> {
        let i = binding.len();
        if i == self.op.params.len() {
            *found += 1;
            if *found > cap {
                return Err(GroundError::TooManyActions { cap });
            }
            out.push(binding.clone());
            return Ok(());
        }
        for &c in &self.candidates[i] {
            if self.injective && binding.contains(&c) {
                continue;
            }
            binding.push(c);
            let ok = self.static_at[i].iter().all(|a| store.contains(&self.bind(a, binding)));
            if ok {
                self.rec(store, cap, found, binding, out)?;
            }
            binding.pop();
        }
        Ok(())
    }

    fn bind(&self, a: &Atom, binding: &[&str]) -> Atom {
        Atom {
            predicate: a.predicate.clone(),
            args: a
                .args
                .iter()
                .map(|x| match self.op.params.iter().position(|p| &p.name == x) {
                    Some(i) => binding[i].to_string(),
                    None => x.clone(),
                })
                .collect(),
        }
    }
}

/// Grounds every operator of `dom` for `prob`.
///
/// Only type-consistent substitutions whose static preconditions hold in the
/// initial state survive, and static preconditions are dropped from the
/// precondition sets. Operators named like a macro in `opts.macros` become
/// macro actions, bound injectively so that their compiled effects match the
/// step sequence.
pub fn ground(dom: &Domain, prob: &Problem, opts: &GroundingOptions) -> Result<Task, GroundError> {
    let part = partition_predicates(dom);
    let store = InitialFactStore::new(&prob.init);
    let mut facts = FactTable::default();
    let mut init: Vec<FactId> = prob
        .init
        .iter()
        .filter(|a| !part.is_static(&a.predicate))
        .map(|a| facts.intern(a.clone()))
        .collect();
    init.sort_unstable();
    init.dedup();
    let mut static_goal_violated = false;
    let mut goal = Vec::new();
    for g in &prob.goal {
        if part.is_static(&g.predicate) {
            static_goal_violated |= !store.contains(g);
        } else {
            goal.push(facts.intern(g.clone()));
        }
    }

    let mut actions = Vec::new();
    let mut found = 0usize;
    for op in &dom.operators {
        let macro_def = opts.macros.get(&op.name);
        let grounder = OperatorGrounder::new(op, prob, dom, &part, macro_def.is_some());
        let mut bindings = Vec::new();
        grounder.run(&store, opts.cap, &mut found, &mut bindings)?;
        for binding in bindings {
            let mut ids = |atoms: &[Atom], fluent_only: bool| -> Vec<FactId> {
                let mut v: Vec<FactId> = atoms
                    .iter()
                    .filter(|a| !fluent_only || !part.is_static(&a.predicate))
                    .map(|a| facts.intern(grounder.bind(a, &binding)))
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            let pre = ids(&op.pre, true);
            let add = ids(&op.add, false);
            let mut del = ids(&op.del, false);
            del.retain(|d| add.binary_search(d).is_err());
            let primitive_expansion = match macro_def {
                Some(m) => {
                    let map: HashMap<&str, &str> = m
                        .params
                        .iter()
                        .map(|p| p.name.as_str())
                        .zip(binding.iter().copied())
                        .collect();
                    m.steps
                        .iter()
                        .map(|s| PlanAction {
                            name: s.operator.clone(),
                            args: s.args.iter().map(|v| map.get(v.as_str()).copied().unwrap_or(v).to_string()).collect(),
                        })
                        .collect()
                }
                None => Vec::new(),
            };
            actions.push(GroundAction {
                id: actions.len(),
                operator: op.name.clone(),
                args: binding.iter().map(|s| s.to_string()).collect(),
                pre,
                add,
                del,
                is_macro: macro_def.is_some(),
                primitive_expansion,
            });
        }
    }
    let index = build_fact_index(&actions, facts.len());
    let zobrist = ZobristTable::new(facts.len(), opts.zobrist_seed);
    Ok(Task {
        facts,
        actions,
        init,
        goal,
        index,
        zobrist,
        init_store: store,
        partition: part,
        static_goal_violated,
    })
}
