use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::AbstractComponent;

/// Enumerations above this many labelings fall back to a refined but possibly non-canonical order.
const MAX_LABELINGS: u64 = 200_000;

/// A component graph with constants replaced by their types, in canonical form:
/// two components get equal abstract types iff they have identical structure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbstractType {
    /// Node types in canonical node order.
    pub types: Vec<String>,
    /// Labeled edges `(predicate, node indices)`, sorted.
    pub edges: Vec<(String, Vec<usize>)>,
}

/// Labeled graph over numbered nodes.
struct Graph<'a> {
    types: Vec<&'a str>,
    edges: Vec<(&'a str, Vec<usize>)>,
}

impl<'a> Graph<'a> {
    fn of(ac: &'a AbstractComponent) -> Self {
        let index: BTreeMap<&str, usize> = ac.nodes.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
        Graph {
            types: ac.nodes.iter().map(|n| n.ty.as_str()).collect(),
            edges: ac
                .facts
                .iter()
                .map(|f| (f.predicate.as_str(), f.args.iter().map(|a| index[a.as_str()]).collect()))
                .collect(),
        }
    }

    /// Color refinement: nodes end up in classes no isomorphism can split further
    /// than this refinement does. Classes are numbered by an invariant ordering.
    fn refined_colors(&self) -> Vec<usize> {
        let rank = |sigs: &[String]| -> Vec<usize> {
            let distinct: BTreeSet<&String> = sigs.iter().collect();
            let order: Vec<&String> = distinct.into_iter().collect();
            sigs.iter().map(|s| order.binary_search(&s).unwrap()).collect()
        };
        let init: Vec<String> = self.types.iter().map(|t| t.to_string()).collect();
        let mut colors = rank(&init);
        loop {
            let sigs: Vec<String> = (0..self.types.len())
                .map(|v| {
                    let colors = &colors;
                    let mut incident: Vec<String> = self
                        .edges
                        .iter()
                        .flat_map(|(label, args)| {
                            args.iter().enumerate().filter(move |(_, &a)| a == v).map(move |(pos, _)| {
                                let cs: Vec<usize> = args.iter().map(|&a| colors[a]).collect();
                                format!("{label}@{pos}{cs:?}")
                            })
                        })
                        .collect();
                    incident.sort();
                    format!("{}|{}", colors[v], incident.join(","))
                })
                .collect();
            let next = rank(&sigs);
            let classes = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
            if classes(&next) == classes(&colors) {
                return next;
            }
            colors = next;
        }
    }

    fn relabeled(&self, order: &[usize]) -> AbstractType {
        // order[k] = original node placed at position k.
        let mut pos = vec![0; order.len()];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        let mut edges: Vec<(String, Vec<usize>)> = self
            .edges
            .iter()
            .map(|(l, args)| (l.to_string(), args.iter().map(|&a| pos[a]).collect()))
            .collect();
        edges.sort();
        AbstractType {
            types: order.iter().map(|&v| self.types[v].to_string()).collect(),
            edges,
        }
    }
}

fn permutations_within(classes: &[Vec<usize>], k: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if k == classes.len() {
        visit(prefix);
        return;
    }
    fn permute(
        rest: &mut Vec<usize>,
        classes: &[Vec<usize>],
        k: usize,
        prefix: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if rest.is_empty() {
            permutations_within(classes, k + 1, prefix, visit);
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            permute(rest, classes, k, prefix, visit);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut rest = classes[k].clone();
    permute(&mut rest, classes, k, prefix, visit);
}

impl AbstractType {
    /// Canonical abstract type of a component.
    pub fn of(ac: &AbstractComponent) -> AbstractType {
        let g = Graph::of(ac);
        let colors = g.refined_colors();
        let n_classes = colors.iter().max().map_or(0, |m| m + 1);
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for (v, &c) in colors.iter().enumerate() {
            classes[c].push(v);
        }
        let labelings = classes
            .iter()
            .map(|c| (1..=c.len() as u64).product::<u64>())
            .try_fold(1u64, |acc, f| acc.checked_mul(f).filter(|&x| x <= MAX_LABELINGS));
        if labelings.is_none() {
            let order: Vec<usize> = classes.concat();
            return g.relabeled(&order);
        }
        let mut best: Option<AbstractType> = None;
        permutations_within(&classes, 0, &mut Vec::new(), &mut |order| {
            let cand = g.relabeled(order);
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        });
        best.unwrap_or(AbstractType {
            types: Vec::new(),
            edges: Vec::new(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.types.len()
    }

    /// Predicates labeling at least one edge.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|(l, _)| l.as_str()).collect()
    }
}

impl fmt::Display for AbstractType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.types.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{i}:{t}")?;
        }
        write!(f, "]")?;
        for (l, args) in &self.edges {
            write!(f, " ({l}")?;
            for a in args {
                write!(f, " {a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Extends an injective, type-preserving node map so that every edge of the
/// source maps onto an edge of the target.
fn embed(
    src_types: &[&str],
    src_edges: &[(&str, Vec<usize>)],
    dst_types: &[&str],
    dst_edges: &BTreeSet<(&str, Vec<usize>)>,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    let v = map.len();
    if v == src_types.len() {
        return true;
    }
    for w in 0..dst_types.len() {
        if used[w] || dst_types[w] != src_types[v] {
            continue;
        }
        map.push(w);
        used[w] = true;
        // Check edges whose nodes are all mapped now.
        let ok = src_edges.iter().all(|(l, args)| {
            if args.iter().any(|&a| a >= map.len()) {
                return true;
            }
            dst_edges.contains(&(*l, args.iter().map(|&a| map[a]).collect()))
        });
        if ok && embed(src_types, src_edges, dst_types, dst_edges, map, used) {
            return true;
        }
        map.pop();
        used[w] = false;
    }
    false
}

/// True iff the labeled graph (`types`, `edges`) is isomorphic to a subgraph of `at`,
/// preserving node types and edge labels.
pub fn embeds_into(types: &[&str], edges: &[(&str, Vec<usize>)], at: &AbstractType) -> bool {
    let dst_types: Vec<&str> = at.types.iter().map(String::as_str).collect();
    let dst_edges: BTreeSet<(&str, Vec<usize>)> = at.edges.iter().map(|(l, a)| (l.as_str(), a.clone())).collect();
    embed(types, edges, &dst_types, &dst_edges, &mut Vec::new(), &mut vec![false; dst_types.len()])
}

/// Direct test for identical structure: equal node and fact counts and a
/// type- and fact-preserving bijection between the nodes.
pub fn identical_structure(a: &AbstractComponent, b: &AbstractComponent) -> bool {
    if a.nodes.len() != b.nodes.len() || a.facts.len() != b.facts.len() {
        return false;
    }
    let ga = Graph::of(a);
    let gb = Graph::of(b);
    let dst_edges: BTreeSet<(&str, Vec<usize>)> = gb.edges.iter().cloned().collect();
    let src_distinct: BTreeSet<&(&str, Vec<usize>)> = ga.edges.iter().collect();
    // Both fact sets are duplicate-free, so an injective edge map between equal-sized sets is onto.
    src_distinct.len() == dst_edges.len()
        && embed(&ga.types, &ga.edges, &gb.types, &dst_edges, &mut Vec::new(), &mut vec![false; gb.types.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{Atom, Param};

    fn comp(nodes: &[(&str, &str)], facts: &[(&str, &str, &str)]) -> AbstractComponent {
        AbstractComponent {
            nodes: nodes.iter().map(|(n, t)| Param::new(*n, *t)).collect(),
            facts: facts.iter().map(|(p, a, b)| Atom::new(*p, [*a, *b])).collect(),
            seed_type: "camera".into(),
        }
    }

    #[test]
    fn renamed_components_share_type() {
        let a = comp(
            &[("cam0", "camera"), ("rover0", "rover"), ("store0", "store")],
            &[("on_board", "cam0", "rover0"), ("store_of", "store0", "rover0")],
        );
        let b = comp(
            &[("store1", "store"), ("cam1", "camera"), ("rover1", "rover")],
            &[("store_of", "store1", "rover1"), ("on_board", "cam1", "rover1")],
        );
        assert_eq!(AbstractType::of(&a), AbstractType::of(&b));
        assert!(identical_structure(&a, &b));
    }

    #[test]
    fn different_label_different_type() {
        let a = comp(&[("c", "camera"), ("r", "rover")], &[("on_board", "c", "r")]);
        let b = comp(&[("c", "camera"), ("r", "rover")], &[("mounted", "c", "r")]);
        assert_ne!(AbstractType::of(&a), AbstractType::of(&b));
        assert!(!identical_structure(&a, &b));
    }
}
