//! Seed derivation for independent, reproducible RNG streams.
//!
//! All randomness in the crate flows through [`rand_chacha::ChaCha8Rng`], a
//! counter-based generator whose output is identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combines a base seed with any number of stream coordinates into a new seed.
///
/// Stable across platforms and releases, unlike `std::hash`.
pub fn derive_seed(base: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(mix(base), |acc, &c| {
        mix(acc ^ mix(c.wrapping_add(0x632b_e59b_d9b4_e019)))
    })
}

pub fn rng_for(base: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, coords))
}
