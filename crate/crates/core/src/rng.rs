//! Seeded random number generation.
//!
//! All randomness flows from a single 64-bit seed through ChaCha8 streams,
//! so independent work units (per-sequence generation, per-draw sampling,
//! sweep cells) can be derived without sharing generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type NspRng = ChaCha8Rng;

/// Identifier recorded in metadata files next to every seed.
pub const RNG_ALGORITHM: &str = "chacha8";

pub fn seeded(seed: u64) -> NspRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for work unit `stream` under `seed`.
pub fn derived(seed: u64, stream: u64) -> NspRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic child seed (SplitMix64 finalizer over seed and index).
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
