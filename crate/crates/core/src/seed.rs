//! Seed splitting.
//!
//! Every random draw in the simulator comes from a ChaCha8 stream keyed by
//! `derive_seed(seed, stream)`, where `stream` names the consumer. Two
//! components given the same seed but different stream ids never share a
//! random sequence. The mixing function is SplitMix64's finalizer applied to
//! `seed` and to `stream` separately and then once more to their combination.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids. Fixed values, part of the reproducibility contract.
pub mod stream {
    pub const TOPOLOGY: u64 = 1;
    pub const BEAMFORMERS: u64 = 2;
    pub const ORIENTATION: u64 = 3;
    pub const TRAFFIC: u64 = 4;
    pub const SCHEDULE: u64 = 5;
    /// Replicate `i` of a sweep uses `REPLICATE + i`.
    pub const REPLICATE: u64 = 1 << 32;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(stream).rotate_left(17))
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}
