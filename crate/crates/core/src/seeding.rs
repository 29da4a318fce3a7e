//! Seed derivation and counter-based sampling.
//!
//! Sample `j` of a seeded ensemble depends only on `(seed, j)`, never on how
//! the ensemble is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::maps::Domain;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds the parts into one well-mixed 64-bit seed. Order matters.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// The `j`-th point of the uniform ensemble with this seed.
pub fn uniform_point(domain: &Domain, seed: u64, j: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j);
    let u: Vec<f64> = (0..domain.dim()).map(|_| rng.random::<f64>()).collect();
    domain.from_unit(&u)
}
