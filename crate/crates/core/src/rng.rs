//! Seed derivation shared by every stochastic component.
//!
//! A run is reproducible from one master seed: each consumer derives its own
//! stream as `derive_seed(master, stream_id)`, and per-column randomness in the
//! sketch uses the global column index as the stream id.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids for sub-seeds derived from a single master seed.
pub mod streams {
    pub const SKETCH: u64 = 1;
    pub const UNIFORM_TRIALS: u64 = 2;
    pub const HYBRID: u64 = 3;
    pub const SVD: u64 = 4;
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit mix of a master seed and a stream index.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix64(mix64(master) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
