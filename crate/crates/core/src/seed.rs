//! Seed derivation.
//!
//! Every random decision in the crate is driven by a [`RandomSeed`]. Child
//! seeds are derived by hashing the parent with a path of integers, so the
//! value handed to (say) individual 7 of generation 12 does not depend on the
//! order in which evaluations happen to run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A 64-bit seed for one deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub const fn new(value: u64) -> Self {
        RandomSeed(value)
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    /// Derive a child seed from this seed and a path of indices.
    pub fn derive(self, path: &[u64]) -> RandomSeed {
        let mut state = splitmix64(self.0 ^ 0x6a09_e667_f3bc_c909);
        for &step in path {
            state = splitmix64(state ^ splitmix64(step.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        RandomSeed(state)
    }

    /// A fresh random stream seeded from this value.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RandomSeed {
    fn from(value: u64) -> Self {
        RandomSeed(value)
    }
}

impl std::fmt::Display for RandomSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Stable domain tags mixed into derived seed paths.
pub(crate) mod tag {
    pub const SPLIT: u64 = 1;
    pub const INIT: u64 = 2;
    pub const EVALUATE: u64 = 3;
    pub const MUTATE: u64 = 4;
    pub const NEIGHBOR: u64 = 5;
    pub const PICK: u64 = 6;
    pub const ACCEPT: u64 = 7;
    pub const RUN: u64 = 8;
    pub const TREE: u64 = 9;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
