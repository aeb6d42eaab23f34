//! "At most one" invariants used to prove that a fact is false whenever a
//! macro's preconditions hold.
//!
//! An invariant is a set of atom patterns sharing a key (a tuple of argument
//! positions). It states that for every key value at most one matching atom is
//! true. Candidates are checked with the usual balance argument: every operator
//! that adds a member must delete, and require, another member with the same key.
//! Soundness additionally needs the initial state to satisfy the invariant, which
//! [`Invariants::retain_valid_in`] checks against concrete problems.

use std::collections::{BTreeSet, HashMap};

use crate::pddl::{Atom, Domain, Problem};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Member {
    predicate: String,
    key: Vec<usize>,
}

impl Member {
    fn key_of<'a>(&self, atom: &'a Atom) -> Option<Vec<&'a str>> {
        if atom.predicate != self.predicate {
            return None;
        }
        self.key.iter().map(|&i| atom.args.get(i).map(String::as_str)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Invariant {
    members: Vec<Member>,
}

impl Invariant {
    fn key_of<'a>(&self, atom: &'a Atom) -> Option<Vec<&'a str>> {
        self.members.iter().find_map(|m| m.key_of(atom))
    }

    fn holds_for(&self, dom: &Domain) -> bool {
        for op in &dom.operators {
            let mut matched_adds = op.add.iter().filter_map(|a| self.key_of(a).map(|k| (a, k)));
            let Some((added, key)) = matched_adds.next() else { continue };
            if matched_adds.next().is_some() {
                return false;
            }
            let balanced = op.del.iter().any(|r| {
                r != added && op.pre.contains(r) && self.key_of(r).as_ref() == Some(&key)
            });
            if !balanced {
                return false;
            }
        }
        true
    }

    fn holds_in(&self, init: &[Atom]) -> bool {
        let mut seen: HashMap<Vec<&str>, &Atom> = HashMap::new();
        for a in init {
            if let Some(k) = self.key_of(a) {
                if let Some(prev) = seen.insert(k, a) {
                    if prev != a {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Candidate invariant linking `q` and `d` through the variables they share.
fn candidate(q: &Atom, d: &Atom) -> Option<Invariant> {
    let mut q_key = Vec::new();
    let mut d_key = Vec::new();
    for (di, v) in d.args.iter().enumerate() {
        if !v.starts_with('?') || d_key.iter().any(|&j: &usize| d.args[j] == *v) {
            continue;
        }
        if let Some(qi) = q.args.iter().position(|a| a == v) {
            q_key.push(qi);
            d_key.push(di);
        }
    }
    if q_key.is_empty() {
        return None;
    }
    let mq = Member {
        predicate: q.predicate.clone(),
        key: q_key,
    };
    let md = Member {
        predicate: d.predicate.clone(),
        key: d_key,
    };
    if mq.predicate == md.predicate && mq.key != md.key {
        return None;
    }
    let mut members = vec![mq, md];
    members.sort();
    members.dedup();
    Some(Invariant { members })
}

/// Verified mutex knowledge for one domain.
#[derive(Debug, Clone, Default)]
pub struct Invariants {
    verified: BTreeSet<Invariant>,
}

impl Invariants {
    /// No knowledge: nothing is ever proven false.
    pub fn none() -> Self {
        Self::default()
    }

    /// Synthesizes every two-pattern invariant suggested by an operator that
    /// requires and deletes one atom while adding another with a shared variable.
    pub fn synthesize(dom: &Domain) -> Self {
        let mut tried = BTreeSet::new();
        let mut verified = BTreeSet::new();
        for op in &dom.operators {
            for e in &op.add {
                for q in op.del.iter().filter(|q| op.pre.contains(q)) {
                    if let Some(inv) = candidate(q, e) {
                        if tried.insert(inv.clone()) && inv.holds_for(dom) {
                            verified.insert(inv);
                        }
                    }
                }
            }
        }
        Invariants { verified }
    }

    /// Drops invariants violated by the initial state of any of `problems`.
    /// `specialize` maps a problem fact into the namespace of the synthesizing domain.
    pub fn retain_valid_in<'a>(
        &mut self,
        problems: impl IntoIterator<Item = &'a Problem>,
        specialize: impl Fn(&Problem, &Atom) -> Atom,
    ) {
        for p in problems {
            let init: Vec<Atom> = p.init.iter().map(|a| specialize(p, a)).collect();
            self.verified.retain(|inv| inv.holds_in(&init));
        }
    }

    pub fn len(&self) -> usize {
        self.verified.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verified.is_empty()
    }

    /// True when `atom` cannot hold in any state where all of `pre` hold.
    pub fn known_false(&self, atom: &Atom, pre: &[Atom]) -> bool {
        pre.iter().any(|q| {
            q != atom
                && self.verified.iter().any(|inv| {
                    matches!((inv.key_of(q), inv.key_of(atom)), (Some(a), Some(b)) if a == b)
                })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_domain;

    const HOIST: &str = "(define (domain h) (:requirements :strips :typing)
      (:types hoist crate)
      (:predicates (available ?h - hoist) (lifting ?h - hoist ?c - crate) (ready ?c - crate))
      (:action grab :parameters (?h - hoist ?c - crate)
         :precondition (and (available ?h) (ready ?c))
         :effect (and (not (available ?h)) (lifting ?h ?c)))
      (:action release :parameters (?h - hoist ?c - crate)
         :precondition (lifting ?h ?c)
         :effect (and (not (lifting ?h ?c)) (available ?h))))";

    #[test]
    fn hoist_status_is_exclusive() {
        let dom = parse_domain(HOIST).unwrap();
        let inv = Invariants::synthesize(&dom);
        assert!(!inv.is_empty());
        let lifting = Atom::new("lifting", ["?h", "?c"]);
        assert!(inv.known_false(&lifting, &[Atom::new("available", ["?h"])]));
        assert!(!inv.known_false(&lifting, &[Atom::new("available", ["?g"])]));
        assert!(!inv.known_false(&lifting, &[Atom::new("ready", ["?c"])]));
    }

    #[test]
    fn unbalanced_add_is_not_an_invariant() {
        let text = HOIST.replace(
            "(:action release",
            "(:action spawn :parameters (?h - hoist ?c - crate) :precondition (ready ?c) :effect (lifting ?h ?c))\n(:action release",
        );
        let dom = parse_domain(&text).unwrap();
        let inv = Invariants::synthesize(&dom);
        let lifting = Atom::new("lifting", ["?h", "?c"]);
        assert!(!inv.known_false(&lifting, &[Atom::new("available", ["?h"])]));
    }

    #[test]
    fn init_violation_drops_invariant() {
        let dom = parse_domain(HOIST).unwrap();
        let mut inv = Invariants::synthesize(&dom);
        let prob = Problem {
            name: "p".into(),
            domain_name: "h".into(),
            objects: vec![],
            init: vec![Atom::new("available", ["h0"]), Atom::new("lifting", ["h0", "c0"])],
            goal: vec![],
        };
        inv.retain_valid_in([&prob], |_, a| a.clone());
        assert!(inv.is_empty());
    }
}
