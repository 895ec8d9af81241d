//! Deterministic random streams.
//!
//! A run owns one seed. Every consumer of randomness (population
//! initialization, frozen trial factors, PAM sampling, archive eviction)
//! draws from its own ChaCha stream so that adding or removing draws in one
//! consumer never shifts another consumer's sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// The purposes a run draws randomness for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Factors = 2,
    Pam = 3,
    Archive = 4,
    Function = 5,
}

/// SplitMix64 finalizer, used to derive child seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent run derived from a campaign seed.
pub fn run_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0xA5A5_A5A5)))
}

/// Source of independent per-purpose streams for one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(purpose as u64);
        rng
    }
}
