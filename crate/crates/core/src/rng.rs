//! Seeded randomness. Every random draw in the crate goes through
//! [`seeded_rng`]: `Xoshiro256PlusPlus` seeded from a single `u64` via
//! SplitMix64 (the `rand_xoshiro` 0.7 `seed_from_u64` implementation).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::cube::{CubeDim, CubeFunction, Side};

pub type CubeRng = Xoshiro256PlusPlus;

pub fn seeded_rng(seed: u64) -> CubeRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Physical-side function with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_function(dim: CubeDim, rng: &mut impl Rng) -> CubeFunction {
    let values = (0..dim.size())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    CubeFunction::new(dim, values, Side::Physical).expect("length is 2^n")
}

/// Real, nonnegative, uniform in `[0, 1)`.
pub fn random_nonnegative(dim: CubeDim, rng: &mut impl Rng) -> CubeFunction {
    let values: Vec<f64> = (0..dim.size()).map(|_| rng.random_range(0.0..1.0)).collect();
    CubeFunction::from_real(dim, &values, Side::Physical).expect("length is 2^n")
}

/// Unit-norm spectrum with independent standard complex Gaussian coefficients
/// on the frequencies accepted by `allowed`, zero elsewhere. Returned on the
/// spectral side.
pub fn gaussian_spectrum(
    dim: CubeDim,
    allowed: impl Fn(usize) -> bool,
    rng: &mut impl Rng,
) -> CubeFunction {
    let mut values = vec![Complex64::new(0.0, 0.0); dim.size()];
    for (y, v) in values.iter_mut().enumerate() {
        if allowed(y) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v = Complex64::new(re, im);
        }
    }
    let mut f = CubeFunction::new(dim, values, Side::Spectral).expect("length is 2^n");
    let norm = f.norm_l2();
    if norm > 0.0 {
        f.scale(norm.recip());
    }
    f
}
