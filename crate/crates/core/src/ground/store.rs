use std::collections::BTreeSet;

use crate::pddl::Atom;

/// Initial-state facts in a balanced ordered tree keyed by `(predicate, args)`.
///
/// Storage grows with the number of facts, not with the number of possible
/// instantiations of each predicate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InitialFactStore {
    facts: BTreeSet<Atom>,
}

impl InitialFactStore {
    pub fn new<'a>(init: impl IntoIterator<Item = &'a Atom>) -> Self {
        InitialFactStore {
            facts: init.into_iter().cloned().collect(),
        }
    }

    pub fn contains(&self, fact: &Atom) -> bool {
        self.facts.contains(fact)
    }

    /// Number of stored entries.
    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.facts.iter()
    }
}
