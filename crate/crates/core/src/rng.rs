//! Deterministic random streams.
//!
//! Every stochastic routine in this crate draws from a ChaCha8 generator, a
//! counter-based stream cipher whose output is fixed by the crate version and
//! independent of platform. Independent streams are derived from a master
//! seed by hashing `(master_seed, index)` with SplitMix64, so stream `i` of a
//! run can be reproduced, or consumed in parallel, without sharing state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `master`.
pub fn derive_stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// A family of reproducible random streams under one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    master: u64,
}

impl Streams {
    pub fn new(master: u64) -> Self {
        Streams { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Generator for stream `index`. Distinct indices give independent streams.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_stream_seed(self.master, index))
    }
}
