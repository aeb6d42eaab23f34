//! Static structure of a problem: the static/fluent predicate partition, the
//! static graph over constants, and its clustering into abstract components.

mod abstract_type;
mod cluster;

use std::collections::{BTreeMap, BTreeSet};

use crate::pddl::{Atom, Domain, Predicate, Problem};

pub use abstract_type::{embeds_into, identical_structure, AbstractType};
pub use cluster::{
    component_abstraction, extend_components, pred_connects_components, AbstractComponent, ClusterError,
    ClusterOptions, Decomposition, SeedOrder, TraceStep,
};

/// Static and fluent predicates of a domain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredicatePartition {
    pub fluent: BTreeSet<String>,
    pub static_: BTreeSet<String>,
    /// Static predicates usable as graph edges: at least binary, with pairwise distinct parameter types.
    pub usable_static: BTreeSet<String>,
    /// Declarations of the usable static predicates, in declaration order.
    pub usable_decls: Vec<Predicate>,
}

impl PredicatePartition {
    pub fn is_static(&self, predicate: &str) -> bool {
        self.static_.contains(predicate)
    }
}

/// A predicate is fluent iff some operator adds or deletes it.
pub fn partition_predicates(dom: &Domain) -> PredicatePartition {
    let mut part = PredicatePartition::default();
    let touched: BTreeSet<&str> = dom
        .operators
        .iter()
        .flat_map(|o| o.add.iter().chain(&o.del))
        .map(|a| a.predicate.as_str())
        .collect();
    for p in &dom.predicates {
        if touched.contains(p.name.as_str()) {
            part.fluent.insert(p.name.clone());
            continue;
        }
        part.static_.insert(p.name.clone());
        let types: BTreeSet<&str> = p.params.iter().map(|q| q.ty.as_str()).collect();
        if p.arity() >= 2 && types.len() == p.arity() {
            part.usable_static.insert(p.name.clone());
            part.usable_decls.push(p.clone());
        }
    }
    part
}

/// Constants linked by usable static facts. Each fact links all of its constants pairwise.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StaticGraph {
    /// Nodes in order of first appearance in the initial state.
    pub nodes: Vec<String>,
    pub node_types: BTreeMap<String, String>,
    /// Usable static facts of the initial state.
    pub facts: Vec<Atom>,
    /// Declarations of the predicates labeling edges, in declaration order.
    pub predicates: Vec<Predicate>,
    /// Atomic types in declaration order; fixes the default seed order.
    pub type_order: Vec<String>,
}

impl StaticGraph {
    pub fn node_type(&self, c: &str) -> Option<&str> {
        self.node_types.get(c).map(String::as_str)
    }

    /// Pairwise labeled edges `(c1, c2, predicate)` derived from the facts.
    pub fn edges(&self) -> Vec<(&str, &str, &str)> {
        let mut out = Vec::new();
        for f in &self.facts {
            for i in 0..f.args.len() {
                for j in i + 1..f.args.len() {
                    out.push((f.args[i].as_str(), f.args[j].as_str(), f.predicate.as_str()));
                }
            }
        }
        out
    }

    pub fn facts_of<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        self.facts.iter().filter(move |f| f.predicate == predicate)
    }

    /// Types of the nodes present in the graph, in declaration order.
    pub fn types(&self) -> Vec<String> {
        let present: BTreeSet<&str> = self.node_types.values().map(String::as_str).collect();
        self.type_order.iter().filter(|t| present.contains(t.as_str())).cloned().collect()
    }

    /// Restriction of the graph to the given facts.
    pub(crate) fn with_facts(&self, facts: Vec<Atom>) -> StaticGraph {
        let mut nodes = Vec::new();
        for f in &facts {
            for a in &f.args {
                if !nodes.contains(a) {
                    nodes.push(a.clone());
                }
            }
        }
        let node_types = nodes
            .iter()
            .map(|n| (n.clone(), self.node_types[n].clone()))
            .collect();
        let used: BTreeSet<&str> = facts.iter().map(|f| f.predicate.as_str()).collect();
        StaticGraph {
            nodes,
            node_types,
            predicates: self.predicates.iter().filter(|p| used.contains(p.name.as_str())).cloned().collect(),
            facts,
            type_order: self.type_order.clone(),
        }
    }
}

/// Builds the static graph of `prob`. Facts must use the predicate names of the
/// domain the partition was computed on.
pub fn build_static_graph(dom: &Domain, prob: &Problem, part: &PredicatePartition) -> StaticGraph {
    let mut g = StaticGraph {
        predicates: part.usable_decls.clone(),
        type_order: dom
            .hierarchy
            .types()
            .iter()
            .filter(|t| dom.hierarchy.is_atomic(t))
            .cloned()
            .collect(),
        ..StaticGraph::default()
    };
    for f in &prob.init {
        if !part.usable_static.contains(&f.predicate) || g.facts.contains(f) {
            continue;
        }
        for a in &f.args {
            if !g.node_types.contains_key(a) {
                let ty = prob.object_type(a).unwrap_or(crate::pddl::ROOT_TYPE);
                g.node_types.insert(a.clone(), ty.to_string());
                g.nodes.push(a.clone());
            }
        }
        g.facts.push(f.clone());
    }
    g
}
