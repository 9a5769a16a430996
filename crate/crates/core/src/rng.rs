//! Deterministic seed derivation.
//!
//! All randomness flows from one master seed. Independent streams (codebook,
//! channel code, per-trial draws) are split off with a SplitMix64 finalizer so
//! that trial `t` sees the same generator no matter which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for element `index` of stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)).wrapping_add(index))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named streams, so call sites cannot accidentally share one.
pub(crate) mod stream {
    pub const CODEBOOK: u64 = 1;
    pub const CHANNEL_CODE: u64 = 2;
    pub const TRIAL: u64 = 3;
    pub const OPTIMIZER: u64 = 4;
    pub const GAIN: u64 = 5;
}
