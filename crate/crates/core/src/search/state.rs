use std::fmt;

use thiserror::Error;

use crate::ground::{FactId, GroundAction, ZobristTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("action {0} is not applicable")]
    Inapplicable(String),
    #[error("macro chain breaks at step {index}: {action} is not applicable")]
    ChainBroken { index: usize, action: String },
}

/// A set of fact ids stored as a bitset, together with its Zobrist key.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State {
    bits: Vec<u64>,
    hash: u64,
}

impl State {
    pub fn new(facts: &[FactId], n_facts: usize, zt: &ZobristTable) -> State {
        let mut bits = vec![0u64; n_facts.div_ceil(64)];
        for &f in facts {
            bits[f / 64] |= 1 << (f % 64);
        }
        let mut s = State { bits, hash: 0 };
        s.hash = zt.hash(s.facts());
        s
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn contains(&self, f: FactId) -> bool {
        self.bits[f / 64] >> (f % 64) & 1 == 1
    }

    pub fn contains_all(&self, facts: &[FactId]) -> bool {
        facts.iter().all(|&f| self.contains(f))
    }

    pub fn facts(&self) -> impl Iterator<Item = FactId> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Approximate heap footprint in bytes.
    pub fn bytes(&self) -> usize {
        self.bits.len() * 8 + std::mem::size_of::<State>()
    }

    fn set(&mut self, f: FactId, value: bool, zt: &ZobristTable) {
        if self.contains(f) != value {
            self.bits[f / 64] ^= 1 << (f % 64);
            self.hash ^= zt.key(f);
        }
    }

    /// `(s \ del) ∪ add`, without checking preconditions; the key is updated incrementally.
    pub fn successor(&self, a: &GroundAction, zt: &ZobristTable) -> State {
        let mut s = self.clone();
        for &d in &a.del {
            s.set(d, false, zt);
        }
        for &f in &a.add {
            s.set(f, true, zt);
        }
        s
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State({:016x}, {:?})", self.hash, self.facts().collect::<Vec<_>>())
    }
}

/// Applies `a` to `s`.
pub fn apply_action(s: &State, a: &GroundAction, zt: &ZobristTable) -> Result<State, ApplyError> {
    if !s.contains_all(&a.pre) {
        return Err(ApplyError::Inapplicable(a.to_string()));
    }
    Ok(s.successor(a, zt))
}

/// Applies `actions` in sequence; each must be applicable in the state its predecessor produced.
pub fn apply_macro(s: &State, actions: &[&GroundAction], zt: &ZobristTable) -> Result<State, ApplyError> {
    let mut cur = s.clone();
    for (index, a) in actions.iter().enumerate() {
        if !cur.contains_all(&a.pre) {
            return Err(ApplyError::ChainBroken {
                index,
                action: a.to_string(),
            });
        }
        cur = cur.successor(a, zt);
    }
    Ok(cur)
}
