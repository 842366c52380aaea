//! Counter-based seed derivation.
//!
//! Every random stream in the crate is addressed by a master seed plus a path
//! of integers (replicate, length, batch, ...). Streams are therefore fixed by
//! their address alone and do not depend on the order in which work runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |acc, &k| mix64(acc ^ mix64(k)))
}

pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Uniform in `[0, 1)` as a pure function of its address.
#[inline]
pub fn hash_uniform(master: u64, path: &[u64]) -> f64 {
    (derive_seed(master, path) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
