//! Seeded randomness shared by every generator in the crate.
//!
//! All random draws go through [`SeededRng`] so that a seed fully determines
//! planes, systems and experiment instances.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The one generator used across the workspace.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed for sub-stream `stream` of `seed`
/// (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// exp(iθ) with θ uniform in [0, 2π).
pub fn unit_circle(rng: &mut SeededRng) -> Complex64 {
    let theta: f64 = rng.random::<f64>() * TAU;
    Complex64::from_polar(1.0, theta)
}

pub fn unit_circle_vec(rng: &mut SeededRng, count: usize) -> Vec<Complex64> {
    (0..count).map(|_| unit_circle(rng)).collect()
}

/// Standard complex Gaussian-ish sample used only for test points.
pub fn complex_uniform(rng: &mut SeededRng, radius: f64) -> Complex64 {
    let re = rng.random_range(-radius..radius);
    let im = rng.random_range(-radius..radius);
    Complex64::new(re, im)
}
