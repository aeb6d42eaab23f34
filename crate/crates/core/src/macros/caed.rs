//! Macro generation by forward search in the space of macro-operators, pruned by
//! static rules and validated against an abstract type.

use std::collections::{BTreeSet, HashMap};

use log::warn;

use super::{append_step, instantiate, Composition, Invariants, MacroOperator};
use crate::abstraction::{embeds_into, AbstractType, PredicatePartition};
use crate::pddl::{Atom, Domain, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacroLimits {
    pub max_length: usize,
    pub max_preconditions: usize,
    /// Search nodes generated before giving up with a partial result.
    pub node_budget: usize,
}

impl Default for MacroLimits {
    fn default() -> Self {
        MacroLimits {
            max_length: 2,
            max_preconditions: 6,
            node_budget: 1_000_000,
        }
    }
}

type Snapshot = (BTreeSet<Atom>, BTreeSet<Atom>);

/// A partial macro together with the effects of each of its prefixes.
#[derive(Debug, Clone)]
pub struct MacroSearchNode {
    pub macro_op: MacroOperator,
    composition: Composition,
    /// `snapshots[k]` holds the `(A, D)` sets after the first `k` operators.
    pub snapshots: Vec<Snapshot>,
}

impl MacroSearchNode {
    pub fn root() -> Self {
        MacroSearchNode {
            macro_op: MacroOperator::empty(),
            composition: Composition::default(),
            snapshots: vec![(BTreeSet::new(), BTreeSet::new())],
        }
    }

    /// Appends `op` under `vm`, failing if the mapping is ill-typed or the sequence is contradictory.
    pub fn child(
        &self,
        op: &Operator,
        vm: &[String],
        dom: &Domain,
        invariants: &Invariants,
    ) -> Result<MacroSearchNode, super::MacroError> {
        let (m, comp) = append_step(op, &self.macro_op, &self.composition, vm, &dom.hierarchy, invariants)?;
        let body = m.compiled.as_ref().expect("append_step compiles");
        let mut snapshots = self.snapshots.clone();
        snapshots.push((body.add_set(), body.del_set()));
        Ok(MacroSearchNode {
            macro_op: m,
            composition: comp,
            snapshots,
        })
    }
}

/// Rejects `op` if one of its preconditions under `vm` is false after the macro so far.
pub fn prune_negated_precondition(op: &Operator, vm: &[String], node: &MacroSearchNode) -> bool {
    match instantiate(op, vm) {
        Ok((pre, _, _)) => pre.iter().any(|p| node.composition.is_deleted(p)),
        Err(_) => true,
    }
}

/// Rejects `op` unless it requires an add effect of the macro's last operator.
pub fn prune_chaining(op: &Operator, vm: &[String], node: &MacroSearchNode, dom: &Domain) -> bool {
    let m = &node.macro_op;
    if m.is_empty() {
        return false;
    }
    let Ok((_, last_add, _)) = m.step_atoms(m.len() - 1, dom) else {
        return true;
    };
    match instantiate(op, vm) {
        Ok((pre, _, _)) => !pre.iter().any(|p| last_add.contains(p)),
        Err(_) => true,
    }
}

/// Rejects a node whose effects after some prefix equal those after a shorter prefix.
pub fn prune_repetition(node: &MacroSearchNode) -> bool {
    let s = &node.snapshots;
    (0..s.len()).any(|k2| (0..k2).any(|k1| s[k1] == s[k2]))
}

/// Rejects a macro that is too long or has too many preconditions.
pub fn prune_size(m: &MacroOperator, limits: &MacroLimits) -> bool {
    let pre = m.compiled.as_ref().map_or(0, |c| c.pre.len());
    m.len() > limits.max_length || pre > limits.max_preconditions
}

/// Accepts a macro whose local static preconditions form a graph that embeds
/// into the abstract type. Local static preconditions are the static
/// preconditions over predicates labeling an edge of `at`.
pub fn locality_check(m: &MacroOperator, at: &AbstractType, part: &PredicatePartition, dom: &Domain) -> bool {
    let Some(body) = &m.compiled else {
        return false;
    };
    let labels = at.labels();
    let local: Vec<&Atom> = body
        .pre
        .iter()
        .filter(|a| part.is_static(&a.predicate) && labels.contains(a.predicate.as_str()))
        .collect();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut types: Vec<&str> = Vec::new();
    for a in &local {
        for x in &a.args {
            if !index.contains_key(x.as_str()) {
                let ty = m
                    .param_type(x)
                    .or_else(|| dom.constants.iter().find(|c| &c.name == x).map(|c| c.ty.as_str()))
                    .unwrap_or(crate::pddl::ROOT_TYPE);
                index.insert(x, types.len());
                types.push(ty);
            }
        }
    }
    let edges: Vec<(&str, Vec<usize>)> = local
        .iter()
        .map(|a| (a.predicate.as_str(), a.args.iter().map(|x| index[x.as_str()]).collect()))
        .collect();
    embeds_into(&types, &edges, at)
}

/// All mappings of `op`'s parameters to macro variables: each parameter binds an
/// unused, type-compatible existing variable or a fresh one.
fn mappings(op: &Operator, m: &MacroOperator, dom: &Domain) -> Vec<Vec<String>> {
    fn rec(
        op: &Operator,
        m: &MacroOperator,
        dom: &Domain,
        i: usize,
        fresh: usize,
        cur: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
    ) {
        if i == op.params.len() {
            out.push(cur.clone());
            return;
        }
        let ty = &op.params[i].ty;
        for p in &m.params {
            if !cur.contains(&p.name) && dom.hierarchy.meet(&p.ty, ty).is_some() {
                cur.push(p.name.clone());
                rec(op, m, dom, i + 1, fresh, cur, out);
                cur.pop();
            }
        }
        cur.push(format!("?x{}", m.params.len() + fresh));
        rec(op, m, dom, i + 1, fresh + 1, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(op, m, dom, 0, 0, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, Default)]
pub struct Generation {
    /// Validated macros in canonical order.
    pub macros: Vec<MacroOperator>,
    /// Search nodes generated.
    pub nodes: usize,
    /// True when the node budget stopped the search early.
    pub truncated: bool,
}

/// Enumerates validated macros for one abstract type by depth-first search.
pub fn generate_macros(
    dom: &Domain,
    at: &AbstractType,
    part: &PredicatePartition,
    limits: &MacroLimits,
    invariants: &Invariants,
) -> Generation {
    let mut found: BTreeSet<MacroOperator> = BTreeSet::new();
    let mut gen = Generation::default();
    let mut stack = vec![MacroSearchNode::root()];
    'search: while let Some(node) = stack.pop() {
        let mut children = Vec::new();
        for op in &dom.operators {
            for vm in mappings(op, &node.macro_op, dom) {
                if gen.nodes >= limits.node_budget {
                    gen.truncated = true;
                    break 'search;
                }
                gen.nodes += 1;
                if prune_chaining(op, &vm, &node, dom) || prune_negated_precondition(op, &vm, &node) {
                    continue;
                }
                let Ok(child) = node.child(op, &vm, dom, invariants) else {
                    continue;
                };
                if prune_size(&child.macro_op, limits) || prune_repetition(&child) {
                    continue;
                }
                if child.macro_op.len() >= 2 && locality_check(&child.macro_op, at, part, dom) {
                    found.insert(child.macro_op.canonical());
                }
                if child.macro_op.len() < limits.max_length {
                    children.push(child);
                }
            }
        }
        // Reverse so that the first operator in declaration order is expanded first.
        stack.extend(children.into_iter().rev());
    }
    if gen.truncated {
        warn!("macro generation stopped after {} nodes; result is partial", gen.nodes);
    }
    gen.macros = found.into_iter().collect();
    gen
}
