//! Macro-operators: ordered operator sequences with a shared variable mapping,
//! optionally compiled into a single STRIPS operator.

pub mod caed;
pub mod invariants;
pub mod solep;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::pddl::{Atom, Domain, Operator, Param, TypeHierarchy};

pub use invariants::Invariants;

/// Joins the contained operator names in a macro's action name.
pub const MACRO_SEPARATOR: &str = "--";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MacroError {
    #[error("variable {var} of {operator} has type {op_type}, incompatible with macro variable type {macro_type}")]
    TypeIncompatible {
        operator: String,
        var: String,
        op_type: String,
        macro_type: String,
    },
    #[error("mapping for {operator} has {found} entries, expected {expected}")]
    MappingArity {
        operator: String,
        expected: usize,
        found: usize,
    },
    #[error("mapping for {0} binds two operator variables to the same macro variable")]
    MappingNotInjective(String),
    #[error("precondition {0} is deleted earlier in the macro")]
    ContradictoryPrecondition(Atom),
    #[error("unknown operator {0}")]
    UnknownOperator(String),
}

/// One operator occurrence inside a macro. `args[i]` is the macro variable bound
/// to the operator's `i`-th parameter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MacroStep {
    pub operator: String,
    pub args: Vec<String>,
}

/// Net precondition and effect sets of a compiled macro.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CompiledBody {
    pub pre: Vec<Atom>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

impl CompiledBody {
    pub fn add_set(&self) -> BTreeSet<Atom> {
        self.add.iter().cloned().collect()
    }

    pub fn del_set(&self) -> BTreeSet<Atom> {
        self.del.iter().cloned().collect()
    }

    pub fn pre_set(&self) -> BTreeSet<Atom> {
        self.pre.iter().cloned().collect()
    }
}

/// Incremental symbolic execution of an operator sequence.
///
/// `net` records the final truth value of every atom touched by an effect.
/// The compiled body drops effects that cannot change the state: adds of atoms
/// already required, and deletes of atoms proven false under the preconditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Composition {
    pre: Vec<Atom>,
    net: Vec<(Atom, bool)>,
}

impl Composition {
    fn net_value(&self, atom: &Atom) -> Option<bool> {
        self.net.iter().find(|(a, _)| a == atom).map(|(_, v)| *v)
    }

    fn set(&mut self, atom: &Atom, value: bool) {
        match self.net.iter_mut().find(|(a, _)| a == atom) {
            Some(slot) => slot.1 = value,
            None => self.net.push((atom.clone(), value)),
        }
    }

    /// True when the sequence so far leaves `atom` false.
    pub fn is_deleted(&self, atom: &Atom) -> bool {
        self.net_value(atom) == Some(false)
    }

    /// First atom of `pre` that the composition has made false.
    pub fn contradiction<'a>(&self, pre: impl IntoIterator<Item = &'a Atom>) -> Option<&'a Atom> {
        pre.into_iter().find(|p| self.net_value(p) == Some(false))
    }

    /// Appends one instantiated operator.
    pub fn push(&mut self, pre: &[Atom], add: &[Atom], del: &[Atom]) -> Result<(), MacroError> {
        if let Some(p) = self.contradiction(pre) {
            return Err(MacroError::ContradictoryPrecondition(p.clone()));
        }
        for p in pre {
            if self.net_value(p).is_none() && !self.pre.contains(p) {
                self.pre.push(p.clone());
            }
        }
        for d in del {
            self.set(d, false);
        }
        for a in add {
            self.set(a, true);
        }
        Ok(())
    }

    pub fn body(&self, invariants: &Invariants) -> CompiledBody {
        let add = self
            .net
            .iter()
            .filter(|(a, v)| *v && !self.pre.contains(a))
            .map(|(a, _)| a.clone())
            .collect();
        let del = self
            .net
            .iter()
            .filter(|(a, v)| !*v && (self.pre.contains(a) || !invariants.known_false(a, &self.pre)))
            .map(|(a, _)| a.clone())
            .collect();
        CompiledBody {
            pre: self.pre.clone(),
            add,
            del,
        }
    }
}

/// A macro-operator: `V(m)` is `params`, the sequence is `steps`, and
/// `compiled` holds `(P(m), A(m), D(m))` when the macro has been compiled.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MacroOperator {
    pub params: Vec<Param>,
    pub steps: Vec<MacroStep>,
    pub compiled: Option<CompiledBody>,
}

impl MacroOperator {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn operator_names(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.operator.as_str()).collect()
    }

    /// Action name: the contained operator names joined by [`MACRO_SEPARATOR`].
    pub fn name(&self) -> String {
        self.operator_names().join(MACRO_SEPARATOR)
    }

    pub fn param_type(&self, var: &str) -> Option<&str> {
        self.params.iter().find(|p| p.name == var).map(|p| p.ty.as_str())
    }

    /// Renames macro variables to `?x0, ?x1, ...` by first occurrence along the steps,
    /// so that macros equal up to variable renaming compare equal.
    pub fn canonical(&self) -> MacroOperator {
        let mut rename: HashMap<String, String> = HashMap::new();
        for s in &self.steps {
            for a in &s.args {
                let n = rename.len();
                rename.entry(a.clone()).or_insert_with(|| format!("?x{n}"));
            }
        }
        for p in &self.params {
            let n = rename.len();
            rename.entry(p.name.clone()).or_insert_with(|| format!("?x{n}"));
        }
        self.renamed(&rename)
    }

    pub fn renamed(&self, rename: &HashMap<String, String>) -> MacroOperator {
        let r = |v: &String| rename.get(v).cloned().unwrap_or_else(|| v.clone());
        let mut params: Vec<Param> = self.params.iter().map(|p| Param::new(r(&p.name), p.ty.clone())).collect();
        params.sort_by_key(|p| p.name.strip_prefix("?x").and_then(|n| n.parse::<usize>().ok()).unwrap_or(usize::MAX));
        MacroOperator {
            params,
            steps: self
                .steps
                .iter()
                .map(|s| MacroStep {
                    operator: s.operator.clone(),
                    args: s.args.iter().map(r).collect(),
                })
                .collect(),
            compiled: self.compiled.as_ref().map(|c| CompiledBody {
                pre: c.pre.iter().map(|a| a.substitute(rename)).collect(),
                add: c.add.iter().map(|a| a.substitute(rename)).collect(),
                del: c.del.iter().map(|a| a.substitute(rename)).collect(),
            }),
        }
    }

    /// The compiled macro as a plain operator named [`MacroOperator::name`].
    pub fn to_operator(&self) -> Option<Operator> {
        let c = self.compiled.as_ref()?;
        Some(Operator {
            name: self.name(),
            params: self.params.clone(),
            pre: c.pre.clone(),
            add: c.add.clone(),
            del: c.del.clone(),
        })
    }

    /// Replays the steps against `dom` and returns the symbolic composition.
    pub fn composition(&self, dom: &Domain) -> Result<Composition, MacroError> {
        let mut comp = Composition::default();
        for s in &self.steps {
            let op = dom.operator(&s.operator).ok_or_else(|| MacroError::UnknownOperator(s.operator.clone()))?;
            let (pre, add, del) = instantiate(op, &s.args)?;
            comp.push(&pre, &add, &del)?;
        }
        Ok(comp)
    }

    /// Instantiated `(pre, add, del)` of step `i`.
    pub fn step_atoms(&self, i: usize, dom: &Domain) -> Result<(Vec<Atom>, Vec<Atom>, Vec<Atom>), MacroError> {
        let s = &self.steps[i];
        let op = dom.operator(&s.operator).ok_or_else(|| MacroError::UnknownOperator(s.operator.clone()))?;
        instantiate(op, &s.args)
    }

    /// Parameters and steps rebuilt from `dom`'s operator signatures.
    pub fn from_steps(steps: Vec<MacroStep>, dom: &Domain) -> Result<MacroOperator, MacroError> {
        let mut m = MacroOperator::empty();
        for s in steps {
            let op = dom.operator(&s.operator).ok_or_else(|| MacroError::UnknownOperator(s.operator.clone()))?;
            m.params = merged_params(op, &m, &s.args, &dom.hierarchy)?;
            m.steps.push(s);
        }
        Ok(m)
    }

    /// Recomputes `compiled` from the steps.
    pub fn compile(&self, dom: &Domain, invariants: &Invariants) -> Result<MacroOperator, MacroError> {
        let body = self.composition(dom)?.body(invariants);
        Ok(MacroOperator {
            compiled: Some(body),
            ..self.clone()
        })
    }
}

impl fmt::Display for MacroOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "({}", s.operator)?;
            for a in &s.args {
                write!(f, " {a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Operator variable → macro variable map for one step.
pub(crate) fn step_map(op: &Operator, args: &[String]) -> Result<HashMap<String, String>, MacroError> {
    if op.params.len() != args.len() {
        return Err(MacroError::MappingArity {
            operator: op.name.clone(),
            expected: op.params.len(),
            found: args.len(),
        });
    }
    Ok(op.params.iter().map(|p| p.name.clone()).zip(args.iter().cloned()).collect())
}

/// Parameters of `m` extended with the variables `vm` binds for `op`.
/// Shared variables take the more specific of the two types.
pub(crate) fn merged_params(
    op: &Operator,
    m: &MacroOperator,
    vm: &[String],
    hierarchy: &TypeHierarchy,
) -> Result<Vec<Param>, MacroError> {
    if op.params.len() != vm.len() {
        return Err(MacroError::MappingArity {
            operator: op.name.clone(),
            expected: op.params.len(),
            found: vm.len(),
        });
    }
    let distinct: BTreeSet<&String> = vm.iter().collect();
    if distinct.len() != vm.len() {
        return Err(MacroError::MappingNotInjective(op.name.clone()));
    }
    let mut params = m.params.clone();
    for (p, v) in op.params.iter().zip(vm) {
        match params.iter_mut().find(|q| &q.name == v) {
            Some(q) => {
                q.ty = hierarchy.meet(&q.ty, &p.ty).ok_or_else(|| MacroError::TypeIncompatible {
                    operator: op.name.clone(),
                    var: p.name.clone(),
                    op_type: p.ty.clone(),
                    macro_type: q.ty.clone(),
                })?;
            }
            None => params.push(Param::new(v.clone(), p.ty.clone())),
        }
    }
    Ok(params)
}

/// `op`'s atoms under the mapping `vm`.
pub(crate) fn instantiate(op: &Operator, vm: &[String]) -> Result<(Vec<Atom>, Vec<Atom>, Vec<Atom>), MacroError> {
    let map = step_map(op, vm)?;
    let inst = |v: &[Atom]| -> Vec<Atom> { v.iter().map(|a| a.substitute(&map)).collect() };
    Ok((inst(&op.pre), inst(&op.add), inst(&op.del)))
}

/// Appends `op` to a macro whose composition so far is `comp`.
pub(crate) fn append_step(
    op: &Operator,
    m: &MacroOperator,
    comp: &Composition,
    vm: &[String],
    hierarchy: &TypeHierarchy,
    invariants: &Invariants,
) -> Result<(MacroOperator, Composition), MacroError> {
    let params = merged_params(op, m, vm, hierarchy)?;
    let (pre, add, del) = instantiate(op, vm)?;
    let mut comp = comp.clone();
    comp.push(&pre, &add, &del)?;
    let mut steps = m.steps.clone();
    steps.push(MacroStep {
        operator: op.name.clone(),
        args: vm.to_vec(),
    });
    let body = comp.body(invariants);
    Ok((
        MacroOperator {
            params,
            steps,
            compiled: Some(body),
        },
        comp,
    ))
}

/// Appends `op` to `m`, binding the operator's `i`-th parameter to macro variable `vm[i]`.
/// Variables absent from `m` become new macro parameters with the operator's type;
/// shared variables take the more specific of the two types.
///
/// The compiled body follows the net effect of the sequence: an atom required
/// and re-added is no add effect, and a deleted atom that the preconditions
/// already prove false (through `invariants`) is no delete effect.
pub fn add_operator_to_macro(
    op: &Operator,
    m: &MacroOperator,
    vm: &[String],
    hierarchy: &TypeHierarchy,
    dom: &Domain,
    invariants: &Invariants,
) -> Result<MacroOperator, MacroError> {
    let comp = m.composition(dom)?;
    append_step(op, m, &comp, vm, hierarchy, invariants).map(|(m, _)| m)
}
