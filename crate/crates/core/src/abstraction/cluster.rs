use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::StaticGraph;
use crate::pddl::{Atom, Param};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClusterError {
    #[error("fact {0} would join two distinct components")]
    ComponentsMerged(Atom),
}

/// Order in which seed types are tried.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SeedOrder {
    /// Atomic types in declaration order.
    #[default]
    Declaration,
    /// Only the listed types, in the given order.
    Explicit(Vec<String>),
    /// Declaration order shuffled by a seeded generator.
    Shuffled(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterOptions {
    /// Inclusive bounds on the number of distinct types in a component.
    pub min_types: usize,
    pub max_types: usize,
    pub seeds: SeedOrder,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            min_types: 2,
            max_types: 4,
            seeds: SeedOrder::Declaration,
        }
    }
}

/// A connected subgraph of the static graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractComponent {
    /// Constants with their atomic types, in insertion order.
    pub nodes: Vec<Param>,
    pub facts: Vec<Atom>,
    pub seed_type: String,
}

impl AbstractComponent {
    pub fn contains(&self, c: &str) -> bool {
        self.nodes.iter().any(|n| n.name == c)
    }

    /// Number of distinct types among the nodes.
    pub fn type_count(&self) -> usize {
        self.nodes.iter().map(|n| n.ty.as_str()).collect::<BTreeSet<_>>().len()
    }
}

/// One predicate considered during clustering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub seed: String,
    pub predicate: String,
    /// False when the predicate would have joined two components.
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decomposition {
    pub components: Vec<AbstractComponent>,
    /// Every predicate tried, for every seed attempt, in order.
    pub trace: Vec<TraceStep>,
    /// Accepted seed type of each independently clustered subgraph.
    pub seeds: Vec<String>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn owner_map(ac: &[AbstractComponent]) -> HashMap<&str, usize> {
    let mut m = HashMap::new();
    for (i, c) in ac.iter().enumerate() {
        for n in &c.nodes {
            m.insert(n.name.as_str(), i);
        }
    }
    m
}

/// True iff adding all facts of `predicate` would put two existing components into one.
pub fn pred_connects_components(g: &StaticGraph, predicate: &str, ac: &[AbstractComponent]) -> bool {
    let owner = owner_map(ac);
    // Ids 0..ac.len() are components; free constants get fresh ids after them.
    let mut free: HashMap<&str, usize> = HashMap::new();
    let mut links = Vec::new();
    for f in g.facts_of(predicate) {
        let ids: Vec<usize> = f
            .args
            .iter()
            .map(|c| match owner.get(c.as_str()) {
                Some(&i) => i,
                None => {
                    let n = ac.len() + free.len();
                    *free.entry(c.as_str()).or_insert(n)
                }
            })
            .collect();
        links.push(ids);
    }
    let mut uf = UnionFind::new(ac.len() + free.len());
    for ids in &links {
        for w in ids.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let mut roots = BTreeSet::new();
    (0..ac.len()).any(|i| !roots.insert(uf.find(i)))
}

/// Extends the components with every fact of `predicate`.
///
/// A fact inside one component becomes an edge; a fact touching one component
/// pulls its free constants in; a fact over free constants starts a new component.
/// Components started here merge when a later fact links them, but two
/// components that existed before the call never merge.
pub fn extend_components(
    g: &StaticGraph,
    predicate: &str,
    ac: &mut Vec<AbstractComponent>,
    seed: &str,
) -> Result<(), ClusterError> {
    let existing = ac.len();
    for f in g.facts_of(predicate) {
        let owner = owner_map(ac);
        let owners: BTreeSet<usize> = f.args.iter().filter_map(|c| owner.get(c.as_str()).copied()).collect();
        if owners.iter().filter(|&&i| i < existing).count() > 1 {
            return Err(ClusterError::ComponentsMerged(f.clone()));
        }
        let target = match owners.first() {
            None => {
                ac.push(AbstractComponent {
                    nodes: Vec::new(),
                    facts: Vec::new(),
                    seed_type: seed.to_string(),
                });
                ac.len() - 1
            }
            Some(&t) => {
                // Fold the other owners, all started in this call, into the lowest.
                for &i in owners.iter().skip(1).rev() {
                    let other = ac.remove(i);
                    for n in other.nodes {
                        if !ac[t].contains(&n.name) {
                            ac[t].nodes.push(n);
                        }
                    }
                    for x in other.facts {
                        if !ac[t].facts.contains(&x) {
                            ac[t].facts.push(x);
                        }
                    }
                }
                t
            }
        };
        let comp = &mut ac[target];
        for c in &f.args {
            if !comp.contains(c) {
                comp.nodes.push(Param::new(c.clone(), g.node_type(c).unwrap_or_default().to_string()));
            }
        }
        if !comp.facts.contains(f) {
            comp.facts.push(f.clone());
        }
    }
    Ok(())
}

fn attempt(
    g: &StaticGraph,
    seed: &str,
    opts: &ClusterOptions,
    trace: &mut Vec<TraceStep>,
) -> Result<Option<Vec<AbstractComponent>>, ClusterError> {
    let mut ac: Vec<AbstractComponent> = g
        .nodes
        .iter()
        .filter(|n| g.node_type(n) == Some(seed))
        .map(|n| AbstractComponent {
            nodes: vec![Param::new(n.clone(), seed.to_string())],
            facts: Vec::new(),
            seed_type: seed.to_string(),
        })
        .collect();
    let mut open: VecDeque<String> = VecDeque::from([seed.to_string()]);
    let mut closed: BTreeSet<String> = BTreeSet::new();
    let mut tried: BTreeSet<String> = BTreeSet::new();
    while let Some(t1) = open.pop_front() {
        closed.insert(t1.clone());
        for p in g.predicates.iter().filter(|p| p.params.iter().any(|q| q.ty == t1)) {
            if !tried.insert(p.name.clone()) {
                continue;
            }
            let used = !pred_connects_components(g, &p.name, &ac);
            trace.push(TraceStep {
                seed: seed.to_string(),
                predicate: p.name.clone(),
                used,
            });
            if used {
                extend_components(g, &p.name, &mut ac, seed)?;
                for q in &p.params {
                    if !closed.contains(&q.ty) && !open.contains(&q.ty) {
                        open.push_back(q.ty.clone());
                    }
                }
            }
        }
    }
    let ok = !ac.is_empty()
        && ac
            .iter()
            .all(|c| (opts.min_types..=opts.max_types).contains(&c.type_count()));
    Ok(ok.then_some(ac))
}

/// Splits `g` into groups of connected subgraphs that share node types.
fn independent_parts(g: &StaticGraph) -> Vec<StaticGraph> {
    let index: HashMap<&str, usize> = g.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut uf = UnionFind::new(g.nodes.len());
    for f in &g.facts {
        for w in f.args.windows(2) {
            uf.union(index[w[0].as_str()], index[w[1].as_str()]);
        }
    }
    let mut first_of_type: HashMap<&str, usize> = HashMap::new();
    for (i, n) in g.nodes.iter().enumerate() {
        let t = g.node_types[n].as_str();
        match first_of_type.get(t) {
            Some(&j) => uf.union(i, j),
            None => {
                first_of_type.insert(t, i);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Atom>)> = Vec::new();
    for f in &g.facts {
        let r = uf.find(index[f.args[0].as_str()]);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, fs)) => fs.push(f.clone()),
            None => groups.push((r, vec![f.clone()])),
        }
    }
    groups.into_iter().map(|(_, fs)| g.with_facts(fs)).collect()
}

/// Clusters the static graph into abstract components.
///
/// Subgraphs with disjoint type sets are clustered independently and the results
/// are united. For each, seed types are tried in the configured order and the
/// first decomposition whose components all satisfy the type-count bounds wins.
pub fn component_abstraction(g: &StaticGraph, opts: &ClusterOptions) -> Result<Decomposition, ClusterError> {
    let mut out = Decomposition::default();
    for part in independent_parts(g) {
        let present = part.types();
        let seeds: Vec<String> = match &opts.seeds {
            SeedOrder::Declaration => present,
            SeedOrder::Explicit(list) => list.iter().filter(|t| present.contains(t)).cloned().collect(),
            SeedOrder::Shuffled(s) => {
                let mut v = present;
                v.shuffle(&mut ChaCha8Rng::seed_from_u64(*s));
                v
            }
        };
        for seed in seeds {
            if let Some(ac) = attempt(&part, &seed, opts, &mut out.trace)? {
                out.components.extend(ac);
                out.seeds.push(seed);
                break;
            }
        }
    }
    Ok(out)
}
