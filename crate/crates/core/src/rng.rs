//! Seeded random streams.
//!
//! Every randomized routine takes a caller-supplied RNG. Experiments derive
//! one independent stream per trial from a single master seed:
//!
//! ```text
//! trial_seed = mix(mix(mix(master) ^ point_index) ^ trial_index)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. The trial seed then seeds a
//! ChaCha8 generator, whose output is stable across platforms and crate
//! versions, so a trial can be replayed alone from its recorded seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all simulation randomness.
pub type SimRng = ChaCha8Rng;

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of sweep point `point` under `master`.
pub fn trial_seed(master: u64, point: u64, trial: u64) -> u64 {
    mix64(mix64(mix64(master) ^ point) ^ trial)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
