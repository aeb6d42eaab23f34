use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FactId;

/// Default seed for the key generator.
pub const DEFAULT_ZOBRIST_SEED: u64 = 0x5eed_0f_2b15;

/// One random 64-bit key per fact; a state's key is the XOR of its facts' keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZobristTable {
    keys: Vec<u64>,
    seed: u64,
}

impl ZobristTable {
    pub fn new(n_facts: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ZobristTable {
            keys: (0..n_facts).map(|_| rng.gen()).collect(),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, f: FactId) -> u64 {
        self.keys[f]
    }

    /// XOR of the keys of `facts`; the empty state hashes to 0.
    pub fn hash(&self, facts: impl IntoIterator<Item = FactId>) -> u64 {
        facts.into_iter().fold(0, |h, f| h ^ self.keys[f])
    }
}
