//! Random-variate helpers shared by the samplers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// The random stream every fit and sampler in this crate runs on.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives an independent seed from a master seed and a counter path,
/// e.g. `child_seed(master, &[trial, iteration])`.
pub fn child_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c.wrapping_add(0xA5A5))))
}

/// Standard normal truncated to `(lower, inf)`.
pub fn std_normal_above<R: Rng + ?Sized>(lower: f64, rng: &mut R) -> f64 {
    if lower < 0.45 {
        loop {
            let z: f64 = StandardNormal.sample(rng);
            if z > lower {
                return z;
            }
        }
    }
    // Exponential proposal with the optimal rate for this bound.
    let rate = 0.5 * (lower + (lower * lower + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = lower + e / rate;
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - rate) * (z - rate)).exp() {
            return z;
        }
    }
}

/// `N(mean, 1)` conditioned on being positive (`positive = true`) or
/// negative; the latent draw of the probit data-augmentation step.
pub fn probit_latent<R: Rng + ?Sized>(mean: f64, positive: bool, rng: &mut R) -> f64 {
    if positive {
        mean + std_normal_above(-mean, rng)
    } else {
        mean - std_normal_above(mean, rng)
    }
}

pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
