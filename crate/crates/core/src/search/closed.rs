use std::collections::{HashMap, HashSet};

use super::State;

/// Seen states, identified by their 64-bit keys.
///
/// By default two states with equal keys count as the same state. The
/// verifying variant also compares the fact sets, for use as a test oracle.
#[derive(Debug, Clone, Default)]
pub struct ClosedSet {
    keys: HashSet<u64>,
    verified: Option<HashMap<u64, Vec<State>>>,
}

impl ClosedSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn verifying() -> Self {
        ClosedSet {
            keys: HashSet::new(),
            verified: Some(HashMap::new()),
        }
    }

    /// Inserts `s`; returns false if it was already present.
    pub fn insert(&mut self, s: &State) -> bool {
        match &mut self.verified {
            None => self.keys.insert(s.hash()),
            Some(map) => {
                let bucket = map.entry(s.hash()).or_default();
                if bucket.contains(s) {
                    false
                } else {
                    bucket.push(s.clone());
                    self.keys.insert(s.hash());
                    true
                }
            }
        }
    }

    pub fn contains(&self, s: &State) -> bool {
        match &self.verified {
            None => self.keys.contains(&s.hash()),
            Some(map) => map.get(&s.hash()).is_some_and(|b| b.contains(s)),
        }
    }

    pub fn len(&self) -> usize {
        match &self.verified {
            None => self.keys.len(),
            Some(map) => map.values().map(Vec::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
