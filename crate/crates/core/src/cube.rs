//! The Hamming cube `{0,1}^n`, its characters, and Fourier analysis.
//!
//! Points are machine integers: bit `j` of a [`PointIndex`] is coordinate
//! `x(j)`, so the group operation is XOR and the length `|x|` is a popcount.
//! The Fourier transform is the normalized Walsh–Hadamard transform
//!
//! ```text
//! f̂(y) = 2^{-n/2} Σ_x f(x) (-1)^{x·y}
//! ```
//!
//! which is real, symmetric and therefore its own inverse.

use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension; `2^26` complex doubles is 1 GiB.
pub const MAX_DIM: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeDim(usize);

impl CubeDim {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::DimensionOutOfRange(n));
        }
        Ok(Self(n))
    }

    #[inline]
    pub fn n(self) -> usize {
        self.0
    }

    /// Number of points, `2^n`.
    #[inline]
    pub fn size(self) -> usize {
        1usize << self.0
    }

    /// Bit mask of the all-ones point `1_n`.
    #[inline]
    pub fn all_ones_bits(self) -> usize {
        self.size() - 1
    }
}

/// A point of the cube, bit `j` holding coordinate `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointIndex(usize);

impl PointIndex {
    pub fn new(dim: CubeDim, bits: usize) -> Result<Self> {
        if bits >= dim.size() {
            return Err(Error::PointOutOfRange { n: dim.n(), bits: bits as u64 });
        }
        Ok(Self(bits))
    }

    pub fn zero() -> Self {
        Self(0)
    }

    pub fn all_ones(dim: CubeDim) -> Self {
        Self(dim.all_ones_bits())
    }

    /// The point `(1,...,1,0,...,0)` with `weight` leading ones.
    pub fn with_weight(dim: CubeDim, weight: usize) -> Result<Self> {
        if weight > dim.n() {
            return Err(Error::IndexOutOfRange { name: "weight", value: weight, n: dim.n() });
        }
        Ok(Self((1usize << weight) - 1))
    }

    #[inline]
    pub fn bits(self) -> usize {
        self.0
    }

    #[inline]
    pub fn length(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn xor(self, other: Self) -> Self {
        Self(self.0 ^ other.0)
    }
}

/// Hamming length `|x|`.
#[inline]
pub fn length(x: PointIndex) -> usize {
    x.length()
}

/// Which side of the Fourier transform a value array lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Physical,
    Spectral,
}

/// Dense complex function on `{0,1}^n`, stored in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFunction {
    dim: CubeDim,
    values: Vec<Complex64>,
    side: Side,
}

impl CubeFunction {
    pub fn new(dim: CubeDim, values: Vec<Complex64>, side: Side) -> Result<Self> {
        if values.len() != dim.size() {
            return Err(Error::LengthMismatch { n: dim.n(), len: values.len() });
        }
        Ok(Self { dim, values, side })
    }

    pub fn from_real(dim: CubeDim, values: &[f64], side: Side) -> Result<Self> {
        Self::new(dim, values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), side)
    }

    pub fn zeros(dim: CubeDim, side: Side) -> Self {
        Self { dim, values: vec![Complex64::new(0.0, 0.0); dim.size()], side }
    }

    pub fn constant(dim: CubeDim, c: Complex64) -> Self {
        Self { dim, values: vec![c; dim.size()], side: Side::Physical }
    }

    /// Indicator of a single point, on the given side.
    pub fn delta(dim: CubeDim, at: PointIndex, side: Side) -> Self {
        let mut f = Self::zeros(dim, side);
        f.values[at.bits()] = Complex64::new(1.0, 0.0);
        f
    }

    #[inline]
    pub fn dim(&self) -> CubeDim {
        self.dim
    }

    #[inline]
    pub fn side(&self) -> Side {
        self.side
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: PointIndex) -> Complex64 {
        self.values[x.bits()]
    }

    pub(crate) fn expect_side(&self, expected: Side) -> Result<()> {
        if self.side != expected {
            return Err(Error::SideMismatch { expected, actual: self.side });
        }
        Ok(())
    }

    pub(crate) fn expect_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim.n(), right: other.dim.n() });
        }
        Ok(())
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `⟨f, g⟩ = Σ_x f(x) conj(g(x))`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.expect_same_dim(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum())
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.expect_same_dim(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    /// Pointwise product; both sides must match.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.expect_same_dim(other)?;
        if self.side != other.side {
            return Err(Error::SideMismatch { expected: self.side, actual: other.side });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { dim: self.dim, values, side: self.side })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CubeFunctionJson::from(self)).expect("plain struct serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: CubeFunctionJson = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
        raw.try_into()
    }
}

/// Wire format: `{ "n": int, "side": "physical"|"spectral", "re": [..], "im": [..] }`.
#[derive(Debug, Serialize, Deserialize)]
struct CubeFunctionJson {
    n: usize,
    side: Side,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<&CubeFunction> for CubeFunctionJson {
    fn from(f: &CubeFunction) -> Self {
        Self {
            n: f.dim.n(),
            side: f.side,
            re: f.values.iter().map(|v| v.re).collect(),
            im: f.values.iter().map(|v| v.im).collect(),
        }
    }
}

impl TryFrom<CubeFunctionJson> for CubeFunction {
    type Error = Error;

    fn try_from(raw: CubeFunctionJson) -> Result<Self> {
        let dim = CubeDim::new(raw.n)?;
        if raw.re.len() != raw.im.len() {
            return Err(Error::Json(format!(
                "re has {} entries but im has {}",
                raw.re.len(),
                raw.im.len()
            )));
        }
        let values = raw.re.iter().zip(&raw.im).map(|(&re, &im)| Complex64::new(re, im)).collect();
        CubeFunction::new(dim, values, raw.side)
    }
}

/// `χ_y(x) = (-1)^{popcount(x & y)}` on the physical side.
pub fn character(dim: CubeDim, y: PointIndex) -> CubeFunction {
    let values = (0..dim.size())
        .map(|x| {
            if (x & y.bits()).count_ones() % 2 == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(-1.0, 0.0)
            }
        })
        .collect();
    CubeFunction { dim, values, side: Side::Physical }
}

/// `χ̃_y = 2^{-n/2} χ_y`, the orthonormal version.
pub fn normalized_character(dim: CubeDim, y: PointIndex) -> CubeFunction {
    let mut f = character(dim, y);
    f.scale(normalization(dim));
    f
}

#[inline]
pub(crate) fn normalization(dim: CubeDim) -> f64 {
    (dim.size() as f64).sqrt().recip()
}

/// Unnormalized in-place Walsh–Hadamard transform (radix-2 butterflies).
///
/// Panics if the length is not a power of two.
pub fn fwht<T>(data: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let len = data.len();
    assert!(len.is_power_of_two(), "FWHT requires a power-of-two length, got {len}");
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        half *= 2;
    }
}

fn normalized_transform(values: &mut [Complex64], dim: CubeDim) {
    fwht(values);
    let c = normalization(dim);
    values.iter_mut().for_each(|v| *v *= c);
}

/// Normalized Fourier transform; physical in, spectral out.
pub fn fourier(f: &CubeFunction) -> Result<CubeFunction> {
    f.expect_side(Side::Physical)?;
    let mut out = f.clone();
    out.into_spectral_in_place()?;
    Ok(out)
}

/// Inverse transform; spectral in, physical out.
pub fn inverse_fourier(f: &CubeFunction) -> Result<CubeFunction> {
    f.expect_side(Side::Spectral)?;
    let mut out = f.clone();
    out.into_physical_in_place()?;
    Ok(out)
}

impl CubeFunction {
    pub fn into_spectral_in_place(&mut self) -> Result<()> {
        self.expect_side(Side::Physical)?;
        normalized_transform(&mut self.values, self.dim);
        self.side = Side::Spectral;
        Ok(())
    }

    pub fn into_physical_in_place(&mut self) -> Result<()> {
        self.expect_side(Side::Spectral)?;
        normalized_transform(&mut self.values, self.dim);
        self.side = Side::Physical;
        Ok(())
    }
}

/// `(f * g)(x) = Σ_y f(x ⊕ y) g(y)`, computed as a product of unnormalized transforms.
pub fn convolve(f: &CubeFunction, g: &CubeFunction) -> Result<CubeFunction> {
    f.expect_same_dim(g)?;
    f.expect_side(Side::Physical)?;
    g.expect_side(Side::Physical)?;
    let mut a = f.values.clone();
    let mut b = g.values.clone();
    fwht(&mut a);
    fwht(&mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
    fwht(&mut a);
    let inv = (f.dim.size() as f64).recip();
    a.iter_mut().for_each(|v| *v *= inv);
    Ok(CubeFunction { dim: f.dim, values: a, side: Side::Physical })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn random_function(dim: CubeDim, rng: &mut impl Rng) -> CubeFunction {
        let values = (0..dim.size())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        CubeFunction::new(dim, values, Side::Physical).unwrap()
    }

    fn direct_fourier(f: &CubeFunction) -> Vec<Complex64> {
        let size = f.dim().size();
        (0..size)
            .map(|y| {
                let s: Complex64 = (0..size)
                    .map(|x| {
                        let sign = if (x & y).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        f.values()[x] * sign
                    })
                    .sum();
                s / (size as f64).sqrt()
            })
            .collect()
    }

    fn direct_convolve(f: &CubeFunction, g: &CubeFunction) -> Vec<Complex64> {
        let size = f.dim().size();
        (0..size)
            .map(|x| (0..size).map(|y| f.values()[x ^ y] * g.values()[y]).sum())
            .collect()
    }

    #[test]
    fn length_counts_bits() {
        let dim = CubeDim::new(4).unwrap();
        assert_eq!(length(PointIndex::zero()), 0);
        assert_eq!(length(PointIndex::all_ones(dim)), 4);
        assert_eq!(length(PointIndex::new(dim, 0b1011).unwrap()), 3);
        assert!(PointIndex::new(dim, 16).is_err());
    }

    #[test]
    fn dimension_bounds() {
        assert!(CubeDim::new(0).is_err());
        assert!(CubeDim::new(27).is_err());
        assert_eq!(CubeDim::new(26).unwrap().size(), 1 << 26);
    }

    #[test]
    fn characters() {
        let d1 = CubeDim::new(1).unwrap();
        let chi = character(d1, PointIndex::new(d1, 1).unwrap());
        assert_eq!(chi.values(), &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);

        let dim = CubeDim::new(5).unwrap();
        let trivial = character(dim, PointIndex::zero());
        assert!(trivial.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));

        for y in 0..dim.size() {
            let chi = character(dim, PointIndex::new(dim, y).unwrap());
            let sq: Complex64 = chi.values().iter().map(|v| v * v).sum();
            assert_eq!(sq, Complex64::new(32.0, 0.0));
        }
    }

    #[test]
    fn characters_form_a_group() {
        let dim = CubeDim::new(4).unwrap();
        for y1 in 0..dim.size() {
            for y2 in 0..dim.size() {
                let p1 = PointIndex::new(dim, y1).unwrap();
                let p2 = PointIndex::new(dim, y2).unwrap();
                let prod = character(dim, p1).pointwise_mul(&character(dim, p2)).unwrap();
                assert_eq!(prod, character(dim, p1.xor(p2)));
            }
        }
    }

    #[test]
    fn fourier_of_basis_elements() {
        let dim = CubeDim::new(4).unwrap();
        for y in 0..dim.size() {
            let p = PointIndex::new(dim, y).unwrap();
            let spec = fourier(&normalized_character(dim, p)).unwrap();
            let expected = CubeFunction::delta(dim, p, Side::Spectral);
            assert!(spec.max_abs_diff(&expected).unwrap() < 1e-14);

            let back = inverse_fourier(&expected).unwrap();
            assert!(back.max_abs_diff(&normalized_character(dim, p)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn fourier_of_delta_matches_direct_sum() {
        for n in 1..=4 {
            let dim = CubeDim::new(n).unwrap();
            let delta = CubeFunction::delta(dim, PointIndex::zero(), Side::Physical);
            let spec = fourier(&delta).unwrap();
            let direct = direct_fourier(&delta);
            let c = 2f64.powf(-(n as f64) / 2.0);
            for (a, b) in spec.values().iter().zip(&direct) {
                assert!((a - b).norm() < 1e-14);
                assert!((a.re - c).abs() < 1e-14 && a.im == 0.0);
            }
        }
    }

    #[test]
    fn fourier_matches_direct_sum_on_random_input() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        for n in 1..=6 {
            let dim = CubeDim::new(n).unwrap();
            let f = random_function(dim, &mut rng);
            let spec = fourier(&f).unwrap();
            let direct = direct_fourier(&f);
            for (a, b) in spec.values().iter().zip(&direct) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn side_is_checked() {
        let dim = CubeDim::new(3).unwrap();
        let f = CubeFunction::zeros(dim, Side::Physical);
        assert!(matches!(inverse_fourier(&f), Err(Error::SideMismatch { .. })));
        let s = fourier(&f).unwrap();
        assert!(fourier(&s).is_err());
        assert!(convolve(&f, &s).is_err());
        assert_eq!(inverse_fourier(&s).unwrap(), f);
    }

    #[test]
    fn length_mismatch_rejected() {
        let dim = CubeDim::new(3).unwrap();
        assert!(matches!(
            CubeFunction::new(dim, vec![Complex64::new(0.0, 0.0); 7], Side::Physical),
            Err(Error::LengthMismatch { n: 3, len: 7 })
        ));
    }

    #[test]
    fn round_trip_and_plancherel() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(10);
        for n in [1, 5, 10, 12] {
            let dim = CubeDim::new(n).unwrap();
            let f = random_function(dim, &mut rng);
            let spec = fourier(&f).unwrap();
            let rel = (spec.norm_l2() - f.norm_l2()).abs() / f.norm_l2();
            assert!(rel < 1e-12, "plancherel n={n}: {rel}");
            let back = inverse_fourier(&spec).unwrap();
            assert!(back.max_abs_diff(&f).unwrap() / f.norm_linf() < 1e-12);
        }
    }

    #[test]
    fn convolution_identities() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let dim = CubeDim::new(6).unwrap();
        let f = random_function(dim, &mut rng);
        let delta = CubeFunction::delta(dim, PointIndex::zero(), Side::Physical);
        assert!(convolve(&f, &delta).unwrap().max_abs_diff(&f).unwrap() < 1e-12);

        let u = CubeFunction::constant(dim, Complex64::new(1.0 / 64.0, 0.0));
        assert!(convolve(&u, &u).unwrap().max_abs_diff(&u).unwrap() < 1e-15);
    }

    #[test]
    fn convolution_matches_double_sum() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(12);
        for n in 1..=8 {
            let dim = CubeDim::new(n).unwrap();
            let f = random_function(dim, &mut rng);
            let g = random_function(dim, &mut rng);
            let fast = convolve(&f, &g).unwrap();
            for (a, b) in fast.values().iter().zip(direct_convolve(&f, &g)) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let dim = CubeDim::new(2).unwrap();
        let f = CubeFunction::new(
            dim,
            vec![
                Complex64::new(1.0, 0.5),
                Complex64::new(-2.0, 0.0),
                Complex64::new(0.0, 3.0),
                Complex64::new(0.25, -0.25),
            ],
            Side::Spectral,
        )
        .unwrap();
        let s = f.to_json();
        assert_eq!(
            s,
            r#"{"n":2,"side":"spectral","re":[1.0,-2.0,0.0,0.25],"im":[0.5,0.0,3.0,-0.25]}"#
        );
        assert_eq!(CubeFunction::from_json(&s).unwrap(), f);
        assert!(CubeFunction::from_json(r#"{"n":2,"side":"physical","re":[1.0],"im":[0.0]}"#).is_err());
        assert!(CubeFunction::from_json(r#"{"n":1,"side":"sideways","re":[1,2],"im":[0,0]}"#).is_err());
    }
}
