//! Spherical means, the noise semigroup, and the reflection `θ`.
//!
//! Each operator has two independent routes: a physical-side definition
//! (mask enumeration, sphere convolution, binomial mixture of spheres) and a
//! spectral multiplier (`κ_k(|y|)`, `e^{-t|y|}`). The routes are
//! cross-checked in the tests and in the acceptance suite.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::cube::{convolve, CubeDim, CubeFunction, PointIndex, Side};
use crate::error::{Error, Result};
use crate::krawtchouk::KrawtchoukTable;
use crate::rng::{random_function, random_nonnegative};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseParams {
    t: f64,
    u_t: f64,
}

impl NoiseParams {
    pub fn new(t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::NegativeTime(t));
        }
        Ok(Self { t, u_t: -(-t).exp_m1() / 2.0 })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `u_t = (1 - e^{-t}) / 2 ∈ [0, 1/2)`.
    pub fn u_t(&self) -> f64 {
        self.u_t
    }
}

/// A sequence of reals indexed by `k ∈ {0..n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierSequence {
    pub values: Vec<f64>,
}

impl MultiplierSequence {
    /// `k ↦ κ^(n)_k(level)`.
    pub fn krawtchouk(table: &KrawtchoukTable, level: usize) -> Self {
        Self { values: table.column(level) }
    }

    /// `k ↦ C(n,k) u^k (1-u)^{n-k}`, evaluated in log space.
    pub fn binomial_weights(n: usize, u: f64) -> Self {
        if u == 0.0 {
            let mut values = vec![0.0; n + 1];
            values[0] = 1.0;
            return Self { values };
        }
        let (lu, lv) = (u.ln(), (-u).ln_1p());
        let mut log_binom = 0.0;
        let values = (0..=n)
            .map(|k| {
                if k > 0 {
                    log_binom += ((n - k + 1) as f64 / k as f64).ln();
                }
                (log_binom + k as f64 * lu + (n - k) as f64 * lv).exp()
            })
            .collect();
        Self { values }
    }
}

/// Exact `C(n, k)` for `n ≤ 63`.
pub(crate) fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Iterator over all `n`-bit masks of popcount `k`, increasing (Gosper's hack).
pub fn weight_masks(n: usize, k: usize) -> impl Iterator<Item = usize> {
    let limit = 1usize << n;
    let first = if k > n { limit } else { (1usize << k) - 1 };
    let mut next = Some(first).filter(|&m| m < limit);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let m = (((r ^ cur) >> 2) / c) | r;
            Some(m).filter(|&m| m < limit)
        };
        Some(cur)
    })
}

fn check_radius(dim: CubeDim, k: usize) -> Result<()> {
    if k > dim.n() {
        return Err(Error::IndexOutOfRange { name: "k", value: k, n: dim.n() });
    }
    Ok(())
}

fn check_table(dim: CubeDim, table: &KrawtchoukTable) -> Result<()> {
    if table.n() != dim.n() {
        return Err(Error::TableMismatch { table: table.n(), function: dim.n() });
    }
    Ok(())
}

/// `S_k f(x)` by summing `f(x ⊕ w)` over every mask `w` of weight `k`.
pub fn spherical_mean_enumerate(f: &CubeFunction, k: usize) -> Result<CubeFunction> {
    f.expect_side(Side::Physical)?;
    let dim = f.dim();
    check_radius(dim, k)?;
    let masks: Vec<usize> = weight_masks(dim.n(), k).collect();
    let inv = (masks.len() as f64).recip();
    let src = f.values();
    let values = (0..dim.size())
        .map(|x| masks.iter().map(|&w| src[x ^ w]).sum::<Complex64>() * inv)
        .collect();
    CubeFunction::new(dim, values, Side::Physical)
}

/// Normalized indicator of the sphere `R_k = { y : |y| = k }`.
pub fn sphere_measure(dim: CubeDim, k: usize) -> Result<CubeFunction> {
    check_radius(dim, k)?;
    let w = (binomial_u64(dim.n(), k) as f64).recip();
    let values = (0..dim.size())
        .map(|y| if y.count_ones() as usize == k { Complex64::new(w, 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();
    CubeFunction::new(dim, values, Side::Physical)
}

/// `S_k f` from its definition as an average over the sphere of radius `k`.
///
/// Small spheres (`C(n,k) ≤ 4n`) are enumerated; larger ones go through
/// `f * |R_k|^{-1} 1_{R_k}`.
pub fn spherical_mean_direct(f: &CubeFunction, k: usize) -> Result<CubeFunction> {
    f.expect_side(Side::Physical)?;
    let dim = f.dim();
    check_radius(dim, k)?;
    if binomial_u64(dim.n(), k) <= 4 * dim.n() as u64 {
        spherical_mean_enumerate(f, k)
    } else {
        convolve(f, &sphere_measure(dim, k)?)
    }
}

/// Multiplies `f̂(y)` by `levels[|y|]` and transforms back.
pub fn apply_level_multiplier(f: &CubeFunction, levels: &[f64]) -> Result<CubeFunction> {
    f.expect_side(Side::Physical)?;
    let dim = f.dim();
    if levels.len() != dim.n() + 1 {
        return Err(Error::InvalidParameter(format!(
            "level multiplier has {} entries, expected {}",
            levels.len(),
            dim.n() + 1
        )));
    }
    let mut out = f.clone();
    out.into_spectral_in_place()?;
    multiply_levels_in_place(&mut out, levels);
    out.into_physical_in_place()?;
    Ok(out)
}

fn multiply_levels_in_place(spectral: &mut CubeFunction, levels: &[f64]) {
    for (y, v) in spectral.values_mut().iter_mut().enumerate() {
        *v *= levels[y.count_ones() as usize];
    }
}

/// `S_k f` via `S_k χ_y = κ_k(|y|) χ_y`.
pub fn spherical_mean_multiplier(f: &CubeFunction, k: usize, table: &KrawtchoukTable) -> Result<CubeFunction> {
    let dim = f.dim();
    check_table(dim, table)?;
    check_radius(dim, k)?;
    apply_level_multiplier(f, table.row(k))
}

/// `S_k f` for every `k` in `radii`, sharing one forward transform.
pub fn spherical_means(f: &CubeFunction, radii: &[usize], table: &KrawtchoukTable) -> Result<Vec<CubeFunction>> {
    f.expect_side(Side::Physical)?;
    let dim = f.dim();
    check_table(dim, table)?;
    for &k in radii {
        check_radius(dim, k)?;
    }
    let mut spectral = f.clone();
    spectral.into_spectral_in_place()?;
    radii
        .iter()
        .map(|&k| {
            let mut g = spectral.clone();
            multiply_levels_in_place(&mut g, table.row(k));
            g.into_physical_in_place()?;
            Ok(g)
        })
        .collect()
}

/// `N_t f` via `N_t χ_y = e^{-t|y|} χ_y`.
pub fn noise_multiplier(f: &CubeFunction, t: f64) -> Result<CubeFunction> {
    NoiseParams::new(t)?;
    let levels: Vec<f64> = (0..=f.dim().n()).map(|j| (-t * j as f64).exp()).collect();
    apply_level_multiplier(f, &levels)
}

/// `N_t f = Σ_k C(n,k) u_t^k (1-u_t)^{n-k} S_k f` with multiplier spherical means.
pub fn noise_binomial(f: &CubeFunction, t: f64, table: &KrawtchoukTable) -> Result<CubeFunction> {
    let params = NoiseParams::new(t)?;
    let dim = f.dim();
    check_table(dim, table)?;
    let n = dim.n();
    let weights = MultiplierSequence::binomial_weights(n, params.u_t());
    // Σ_k w_k S_k is the level multiplier j ↦ Σ_k w_k κ_k(j); k is summed in
    // ascending order so the result is bit-stable.
    let levels: Vec<f64> = (0..=n)
        .map(|j| weights.values.iter().enumerate().map(|(k, w)| w * table.float(k, j)).sum())
        .collect();
    apply_level_multiplier(f, &levels)
}

/// Worst observed violation of each diffusion-semigroup axiom.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SemigroupReport {
    pub n: usize,
    pub trials: usize,
    pub contraction_l1: f64,
    pub contraction_l2: f64,
    pub contraction_linf: f64,
    pub symmetry: f64,
    pub positivity: f64,
    pub conservation: f64,
}

impl SemigroupReport {
    pub fn worst(&self) -> f64 {
        [
            self.contraction_l1,
            self.contraction_l2,
            self.contraction_linf,
            self.symmetry,
            self.positivity,
            self.conservation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks contraction on `ℓ^1, ℓ^2, ℓ^∞`, self-adjointness, positivity and
/// `N_t 1 = 1` on `trials` random functions per time in `t_grid`.
/// Contraction and symmetry violations are relative to the input norms.
pub fn semigroup_axioms_check(
    dim: CubeDim,
    t_grid: &[f64],
    trials: usize,
    rng: &mut impl Rng,
) -> Result<SemigroupReport> {
    let mut rep = SemigroupReport { n: dim.n(), trials, ..Default::default() };
    let one = CubeFunction::constant(dim, Complex64::new(1.0, 0.0));
    for &t in t_grid {
        let ones = noise_multiplier(&one, t)?;
        rep.conservation = rep.conservation.max(ones.max_abs_diff(&one)?);
    }
    for _ in 0..trials {
        let f = random_function(dim, rng);
        let g = random_function(dim, rng);
        let p = random_nonnegative(dim, rng);
        for &t in t_grid {
            let nf = noise_multiplier(&f, t)?;
            let ng = noise_multiplier(&g, t)?;
            let excess = |after: f64, before: f64| ((after - before) / before).max(0.0);
            rep.contraction_l1 = rep.contraction_l1.max(excess(nf.norm_l1(), f.norm_l1()));
            rep.contraction_l2 = rep.contraction_l2.max(excess(nf.norm_l2(), f.norm_l2()));
            rep.contraction_linf = rep.contraction_linf.max(excess(nf.norm_linf(), f.norm_linf()));
            let asym = (nf.inner(&g)? - f.inner(&ng)?).norm() / (f.norm_l2() * g.norm_l2());
            rep.symmetry = rep.symmetry.max(asym);
            let np = noise_multiplier(&p, t)?;
            for v in np.values() {
                rep.positivity = rep.positivity.max(-v.re).max(v.im.abs());
            }
        }
    }
    Ok(rep)
}

/// `θ`, defined by `θχ_y = χ_{y⊕1_n}`.
///
/// On the spectral side this is the index permutation `y ↦ y ⊕ 1_n`; on the
/// physical side it is the equivalent sign flip `θf(x) = (-1)^{|x|} f(x)`.
/// Both are exact and preserve the side marker.
pub fn reflect(f: &CubeFunction) -> CubeFunction {
    let dim = f.dim();
    let src = f.values();
    let values: Vec<Complex64> = match f.side() {
        Side::Spectral => {
            let ones = dim.all_ones_bits();
            (0..dim.size()).map(|y| src[y ^ ones]).collect()
        }
        Side::Physical => src
            .iter()
            .enumerate()
            .map(|(x, &v)| if x.count_ones() % 2 == 0 { v } else { -v })
            .collect(),
    };
    CubeFunction::new(dim, values, f.side()).expect("same length")
}

/// Largest `|S_k g(z) - (-1)^{k+|z|} S_k θg(z)|` over all `k, z`.
pub fn reflection_identity_violation(g: &CubeFunction, table: &KrawtchoukTable) -> Result<f64> {
    let n = g.dim().n();
    let radii: Vec<usize> = (0..=n).collect();
    let plain = spherical_means(g, &radii, table)?;
    let reflected = spherical_means(&reflect(g), &radii, table)?;
    let mut worst: f64 = 0.0;
    for (k, (a, b)) in plain.iter().zip(&reflected).enumerate() {
        for z in 0..g.dim().size() {
            let sign = if (k + z.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max((a.values()[z] - b.values()[z] * sign).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntipodalReport {
    pub n: usize,
    pub checked: usize,
    pub max_violation: f64,
}

/// Verifies `S_k f(x ⊕ 1_n) = S_{n-k} f(x)` for all `k, x`, using direct means.
pub fn antipodal_check(f: &CubeFunction) -> Result<AntipodalReport> {
    let dim = f.dim();
    let n = dim.n();
    let means = (0..=n).map(|k| spherical_mean_direct(f, k)).collect::<Result<Vec<_>>>()?;
    let ones = PointIndex::all_ones(dim);
    let mut rep = AntipodalReport { n, checked: 0, max_violation: 0.0 };
    for k in 0..=n {
        for x in 0..dim.size() {
            let p = PointIndex::new(dim, x)?;
            let d = (means[k].get(p.xor(ones)) - means[n - k].get(p)).norm();
            rep.max_violation = rep.max_violation.max(d);
            rep.checked += 1;
        }
    }
    Ok(rep)
}
