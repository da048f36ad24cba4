//! The r-variation seminorm
//!
//! ```text
//! V_r(a_t : t ∈ Z) = sup_{t_0 < ... < t_J in Z} ( Σ_j |a_{t_{j-1}} - a_{t_j}|^r )^{1/r}
//! ```
//!
//! For a finite index set the supremum is a longest path in the DAG of index
//! pairs with edge weight `|a_i - a_j|^r`, so it is computed exactly by an
//! `O(J²)` dynamic program. The module also carries the dyadic tools used in
//! the decomposition arguments and randomized checkers for the standard
//! variation inequalities.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{CubeDim, CubeFunction, Side};
use crate::error::{Error, Result};

/// Largest sequence accepted by [`vr_bruteforce`] (`J ≤ 16`).
pub const BRUTEFORCE_MAX_LEN: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusKind {
    Full,
    Parity(u8),
    Dyadic,
    /// Inclusive bounds.
    Interval(usize, usize),
    Custom,
}

/// Strictly increasing subset of `{0..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadiusSet {
    n: usize,
    indices: Vec<usize>,
    kind: RadiusKind,
}

impl RadiusSet {
    pub fn full(n: usize) -> Self {
        Self { n, indices: (0..=n).collect(), kind: RadiusKind::Full }
    }

    /// `(2ℤ + q) ∩ {0..n}`.
    pub fn parity(n: usize, q: u8) -> Result<Self> {
        if q > 1 {
            return Err(Error::InvalidRadiusSet(format!("parity class q = {q} must be 0 or 1")));
        }
        let indices = (q as usize..=n).step_by(2).collect();
        Ok(Self { n, indices, kind: RadiusKind::Parity(q) })
    }

    /// `{1, 2, 4, ...} ∩ {0..n}`.
    pub fn dyadic(n: usize) -> Self {
        let indices = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|&k| k <= n).collect();
        Self { n, indices, kind: RadiusKind::Dyadic }
    }

    /// `{a..=b}`.
    pub fn interval(n: usize, a: usize, b: usize) -> Result<Self> {
        if a > b || b > n {
            return Err(Error::InvalidRadiusSet(format!("interval [{a}, {b}] not inside 0..={n}")));
        }
        Ok(Self { n, indices: (a..=b).collect(), kind: RadiusKind::Interval(a, b) })
    }

    pub fn from_indices(n: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRadiusSet("indices must be strictly increasing".into()));
        }
        if indices.last().is_some_and(|&k| k > n) {
            return Err(Error::InvalidRadiusSet(format!("index outside 0..={n}")));
        }
        Ok(Self { n, indices, kind: RadiusKind::Custom })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn kind(&self) -> RadiusKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// A labelled finite sequence and the exponent `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationQuery {
    r: f64,
    values: Vec<Complex64>,
    labels: Vec<i64>,
}

fn check_exponent(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidExponent(r));
    }
    Ok(())
}

impl VariationQuery {
    /// Labels default to `0, 1, 2, ...`.
    pub fn new(r: f64, values: Vec<Complex64>) -> Result<Self> {
        let labels = (0..values.len() as i64).collect();
        Self::with_labels(r, values, labels)
    }

    pub fn real(r: f64, values: &[f64]) -> Result<Self> {
        Self::new(r, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn with_labels(r: f64, values: Vec<Complex64>, labels: Vec<i64>) -> Result<Self> {
        check_exponent(r)?;
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        if labels.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} values",
                labels.len(),
                values.len()
            )));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedLabels);
        }
        Ok(Self { r, values, labels })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }
}

/// JSON: `{ "r", "value", "chain": [labels] }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationResult {
    pub r: f64,
    pub value: f64,
    pub chain: Vec<i64>,
}

#[inline]
fn jump(a: Complex64, b: Complex64, r: f64) -> f64 {
    let d = (a - b).norm();
    if r == 1.0 {
        d
    } else {
        d.powf(r)
    }
}

/// `best[i]` = largest `Σ |diff|^r` over chains starting at `i` (stopping allowed).
fn best_from(values: &[Complex64], r: f64, best: &mut Vec<f64>) {
    let len = values.len();
    best.clear();
    best.resize(len, 0.0);
    for i in (0..len).rev() {
        let mut b = 0.0f64;
        for j in i + 1..len {
            b = b.max(jump(values[i], values[j], r) + best[j]);
        }
        best[i] = b;
    }
}

fn vr_value_with(values: &[Complex64], r: f64, scratch: &mut Vec<f64>) -> f64 {
    best_from(values, r, scratch);
    let total = scratch.iter().copied().fold(0.0, f64::max);
    total.powf(r.recip())
}

/// `V_r` of an unlabelled sequence; no chain is reconstructed.
pub fn vr_value(values: &[Complex64], r: f64) -> Result<f64> {
    check_exponent(r)?;
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(vr_value_with(values, r, &mut Vec::new()))
}

/// Exact `V_r` with the lexicographically smallest maximizing chain.
pub fn vr_exact(q: &VariationQuery) -> VariationResult {
    let (values, r) = (&q.values, q.r);
    let mut best = Vec::new();
    best_from(values, r, &mut best);
    let total = best.iter().copied().fold(0.0, f64::max);
    // Sums along different orders may differ in the last bits.
    let tol = 1e-12 * total.max(f64::MIN_POSITIVE);

    let mut i = best.iter().position(|&b| b >= total - tol).unwrap_or(0);
    let mut chain = vec![q.labels[i]];
    let mut remaining = total;
    while remaining > tol {
        let Some(next) =
            (i + 1..values.len()).find(|&j| jump(values[i], values[j], r) + best[j] >= remaining - tol)
        else {
            break;
        };
        remaining -= jump(values[i], values[next], r);
        i = next;
        chain.push(q.labels[i]);
    }
    VariationResult { r, value: total.powf(r.recip()), chain }
}

/// Exhaustive maximum over every subset taken as a chain.
pub fn vr_bruteforce(q: &VariationQuery) -> Result<f64> {
    let len = q.values.len();
    if len > BRUTEFORCE_MAX_LEN {
        return Err(Error::SequenceTooLong { len, max: BRUTEFORCE_MAX_LEN });
    }
    let mut best = 0.0f64;
    let mut chosen = Vec::with_capacity(len);
    for mask in 1u32..(1u32 << len) {
        if mask.count_ones() < 2 {
            continue;
        }
        chosen.clear();
        chosen.extend((0..len).filter(|&i| mask >> i & 1 == 1));
        let s: f64 = chosen.windows(2).map(|w| jump(q.values[w[0]], q.values[w[1]], q.r)).sum();
        best = best.max(s);
    }
    Ok(best.powf(q.r.recip()))
}

/// Largest power of two `≤ t`.
pub fn dyadic_floor(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositive(t));
    }
    let mut p = t.log2().floor().exp2();
    while p > t {
        p /= 2.0;
    }
    while p * 2.0 <= t {
        p *= 2.0;
    }
    Ok(p)
}

/// Half-open `[start, end)` with `end - start = 2^scale` and `start` a multiple of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DyadicInterval {
    pub start: u64,
    pub end: u64,
    pub scale: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DyadicPartition {
    pub intervals: Vec<DyadicInterval>,
}

/// Splits `[a, b)` into aligned dyadic intervals of scale `≤ l`, at most two
/// per scale: each step takes the largest aligned block starting at the cursor
/// that still fits.
pub fn dyadic_partition(a: u64, b: u64, l: u32) -> Result<DyadicPartition> {
    if l >= 63 || a >= b || b > 1u64 << l {
        return Err(Error::InvalidRange { a, b, l });
    }
    let mut intervals = Vec::new();
    let mut cur = a;
    while cur < b {
        let align = if cur == 0 { l } else { cur.trailing_zeros().min(l) };
        let scale = (0..=align).rev().find(|&g| cur + (1u64 << g) <= b).expect("scale 0 always fits");
        let end = cur + (1u64 << scale);
        intervals.push(DyadicInterval { start: cur, end, scale });
        cur = end;
    }
    Ok(DyadicPartition { intervals })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionCheck {
    pub disjoint: bool,
    pub covers: bool,
    pub aligned: bool,
    pub max_per_scale: usize,
}

impl PartitionCheck {
    pub fn ok(&self) -> bool {
        self.disjoint && self.covers && self.aligned && self.max_per_scale <= 2
    }
}

impl DyadicPartition {
    /// Structural checks against the target `[a, b)` inside `[0, 2^l)`.
    pub fn check(&self, a: u64, b: u64, l: u32) -> PartitionCheck {
        let mut sorted = self.intervals.clone();
        sorted.sort_by_key(|p| p.start);
        let disjoint = sorted.windows(2).all(|w| w[0].end <= w[1].start);
        let covered: u64 = sorted.iter().map(|p| p.end - p.start).sum();
        let covers = disjoint
            && covered == b - a
            && sorted.first().is_some_and(|p| p.start == a)
            && sorted.last().is_some_and(|p| p.end == b);
        let aligned = sorted.iter().all(|p| {
            p.scale <= l && p.end - p.start == 1u64 << p.scale && p.start % (1u64 << p.scale) == 0 && p.end <= 1u64 << l
        });
        let mut per_scale = vec![0usize; l as usize + 1];
        for p in &sorted {
            if let Some(c) = per_scale.get_mut(p.scale as usize) {
                *c += 1;
            }
        }
        PartitionCheck { disjoint, covers, aligned, max_per_scale: per_scale.into_iter().max().unwrap_or(0) }
    }
}

/// Outcome of one inequality over many random instances. `worst_slack` is the
/// smallest `rhs - lhs` seen; a violation is a slack below `-1e-12·scale`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

impl PropertyCheck {
    fn new(name: &str) -> Self {
        Self { name: name.into(), instances: 0, violations: 0, worst_slack: f64::INFINITY }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        let slack = rhs - lhs;
        self.instances += 1;
        self.worst_slack = self.worst_slack.min(slack);
        if slack < -1e-12 * lhs.abs().max(rhs.abs()).max(1.0) {
            self.violations += 1;
        }
    }

    /// Two-sided equality check: slack is `-|lhs - rhs|`.
    fn record_eq(&mut self, lhs: f64, rhs: f64) {
        let d = (lhs - rhs).abs();
        self.instances += 1;
        self.worst_slack = self.worst_slack.min(-d);
        if d > 1e-12 * lhs.abs().max(rhs.abs()).max(1.0) {
            self.violations += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub trials: usize,
    pub checks: Vec<PropertyCheck>,
    /// Largest `(V_r(Z) - V_r(𝔻 ∩ Z)) / (Σ_k V_r([k,2k) ∩ Z)^r)^{1/r}` seen:
    /// the smallest block constant consistent with the sampled instances.
    pub dyadic_empirical_constant: f64,
}

impl PropertyReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

const EXPONENTS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn labelled_value(labels: &[i64], values: &[Complex64], keep: impl Fn(i64) -> bool, r: f64) -> f64 {
    let picked: Vec<Complex64> =
        labels.iter().zip(values).filter(|(&t, _)| keep(t)).map(|(_, &v)| v).collect();
    if picked.is_empty() {
        0.0
    } else {
        vr_value(&picked, r).expect("exponent validated")
    }
}

/// Randomized check of the standard properties of `V_r`: monotonicity in `r`,
/// monotonicity under restriction, invariance under nondecreasing
/// reparametrization, homogeneity, the triangle inequality, the `ℓ^r` bound
/// with constant 2, and the dyadic decomposition with constant 3.
pub fn check_variation_properties(trials: usize, rng: &mut impl Rng) -> PropertyReport {
    let mut mono_r = PropertyCheck::new("monotone_in_r");
    let mut subset = PropertyCheck::new("subset_monotone");
    let mut reparam = PropertyCheck::new("reparametrization");
    let mut homog = PropertyCheck::new("homogeneity");
    let mut triangle = PropertyCheck::new("triangle");
    let mut lr_bound = PropertyCheck::new("lr_bound_2");
    let mut dyadic = PropertyCheck::new("dyadic_decomposition_3");
    let mut dyadic_constant = 0.0f64;

    for _ in 0..trials {
        let r = EXPONENTS[rng.random_range(0..EXPONENTS.len())];
        // Z ⊂ {1..48} closed under the dyadic floor.
        let mut z: Vec<i64> = (1..=48).filter(|_| rng.random_bool(0.25)).collect();
        if z.is_empty() {
            z.push(rng.random_range(1..=48));
        }
        let floors: Vec<i64> = z.iter().map(|&t| 1i64 << (63 - t.leading_zeros())).collect();
        z.extend(floors);
        z.sort_unstable();
        z.dedup();
        let a: Vec<Complex64> = z.iter().map(|_| random_complex(rng)).collect();
        let b: Vec<Complex64> = z.iter().map(|_| random_complex(rng)).collect();
        let va = vr_value(&a, r).expect("valid");

        let r2 = r + rng.random_range(0.0..3.0);
        mono_r.record(vr_value(&a, r2).expect("valid"), va);
        mono_r.record(vr_value(&a, r).expect("valid"), va);

        let sub: Vec<Complex64> = a.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        if !sub.is_empty() {
            subset.record(vr_value(&sub, r).expect("valid"), va);
        }

        // φ: {0..m} → Z nondecreasing, possibly repeating values.
        let m = rng.random_range(1..=2 * z.len());
        let mut phi: Vec<usize> = (0..m).map(|_| rng.random_range(0..z.len())).collect();
        phi.sort_unstable();
        let composed: Vec<Complex64> = phi.iter().map(|&i| a[i]).collect();
        let mut image = phi.clone();
        image.dedup();
        let on_image: Vec<Complex64> = image.iter().map(|&i| a[i]).collect();
        reparam.record_eq(vr_value(&composed, r).expect("valid"), vr_value(&on_image, r).expect("valid"));

        let lambda = random_complex(rng) * 3.0;
        let scaled: Vec<Complex64> = a.iter().map(|v| v * lambda).collect();
        homog.record_eq(vr_value(&scaled, r).expect("valid"), lambda.norm() * va);

        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        triangle.record(vr_value(&sum, r).expect("valid"), va + vr_value(&b, r).expect("valid"));

        let lr: f64 = a.iter().map(|v| v.norm().powf(r)).sum::<f64>().powf(r.recip());
        lr_bound.record(va, 2.0 * lr);

        let on_dyadic = labelled_value(&z, &a, |t| t.count_ones() == 1, r);
        let mut blocks = 0.0;
        let mut k = 1i64;
        while k <= *z.last().expect("nonempty") {
            blocks += labelled_value(&z, &a, |t| t >= k && t < 2 * k, r).powf(r);
            k *= 2;
        }
        let blocks = blocks.powf(r.recip());
        dyadic.record(va, 3.0 * blocks + on_dyadic);
        if blocks > 0.0 {
            dyadic_constant = dyadic_constant.max((va - on_dyadic) / blocks);
        }
    }

    PropertyReport {
        trials,
        checks: vec![mono_r, subset, reparam, homog, triangle, lr_bound, dyadic],
        dyadic_empirical_constant: dyadic_constant,
    }
}

/// Right-hand side of the chaining bound:
/// `2^{1-1/s} Σ_{g=0}^{l} ( Σ_{h ≤ 2^{l-g}, h·2^g ≤ M} |a_{(h-1)2^g} - a_{h2^g}|^s )^{1/s}`.
pub fn chain_bound(a: &[Complex64], l: u32, m: i64, s: f64) -> f64 {
    let mut total = 0.0;
    for g in 0..=l {
        let step = 1i64 << g;
        let mut inner = 0.0;
        for h in 1..=(1i64 << (l - g)) {
            if h * step > m {
                break;
            }
            inner += jump(a[((h - 1) * step) as usize], a[(h * step) as usize], s);
        }
        total += inner.powf(s.recip());
    }
    2f64.powf(1.0 - s.recip()) * total
}

/// Checks `V_s(a_k : k ∈ {0..2^l} ∩ (-∞, M]) ≤ chain_bound` on random sequences.
pub fn check_chain_lemma(l: u32, m: i64, s: f64, trials: usize, rng: &mut impl Rng) -> Result<PropertyCheck> {
    check_exponent(s)?;
    if l > 10 {
        return Err(Error::InvalidParameter(format!("chain lemma check limited to l <= 10, got {l}")));
    }
    let mut check = PropertyCheck::new("chain_lemma");
    let len = (1usize << l) + 1;
    for _ in 0..trials {
        let a: Vec<Complex64> = (0..len).map(|_| random_complex(rng)).collect();
        let upto = m.min(len as i64 - 1);
        let lhs = if upto < 0 { 0.0 } else { vr_value(&a[..=upto as usize], s)? };
        check.record(lhs, chain_bound(&a, l, m, s));
    }
    Ok(check)
}

/// `x ↦ V_r(f_k(x) : k)` for a family of physical-side functions listed in
/// radius order. The result is real, stored with zero imaginary part.
pub fn vr_pointwise(family: &[CubeFunction], r: f64) -> Result<CubeFunction> {
    check_exponent(r)?;
    let first = family.first().ok_or(Error::EmptySequence)?;
    let dim: CubeDim = first.dim();
    for f in family {
        first.expect_same_dim(f)?;
        f.expect_side(Side::Physical)?;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); dim.size()];
    const CHUNK: usize = 1024;
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, slot)| {
        let mut seq = Vec::with_capacity(family.len());
        let mut scratch = Vec::with_capacity(family.len());
        for (i, o) in slot.iter_mut().enumerate() {
            let x = c * CHUNK + i;
            seq.clear();
            seq.extend(family.iter().map(|f| f.values()[x]));
            *o = Complex64::new(vr_value_with(&seq, r, &mut scratch), 0.0);
        }
    });
    CubeFunction::new(dim, out, Side::Physical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn constant_and_single() {
        let q = VariationQuery::real(2.0, &[3.0; 5]).unwrap();
        let res = vr_exact(&q);
        assert_eq!(res.value, 0.0);
        assert_eq!(res.chain, vec![0]);
        let one = VariationQuery::real(1.5, &[7.0]).unwrap();
        assert_eq!(vr_exact(&one).value, 0.0);
        assert_eq!(vr_bruteforce(&one).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(matches!(VariationQuery::real(0.5, &[1.0]), Err(Error::InvalidExponent(_))));
        assert!(matches!(VariationQuery::real(2.0, &[]), Err(Error::EmptySequence)));
        assert!(matches!(
            VariationQuery::with_labels(2.0, vec![c(1.0), c(2.0)], vec![3, 3]),
            Err(Error::UnsortedLabels)
        ));
        let long = VariationQuery::real(1.0, &[0.0; 18]).unwrap();
        assert!(matches!(vr_bruteforce(&long), Err(Error::SequenceTooLong { .. })));
    }

    #[test]
    fn alternating_sequence() {
        for n in 1..=10 {
            let seq: Vec<f64> = (0..=n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
            for r in [1.0, 1.5, 2.0, 3.0] {
                let q = VariationQuery::real(r, &seq).unwrap();
                let res = vr_exact(&q);
                let expected = 2.0 * (n as f64).powf(1.0 / r);
                assert!((res.value - expected).abs() < 1e-12 * expected);
                assert_eq!(res.chain, (0..=n as i64).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn hand_example() {
        // [0,3,1,2], r=2: 9 + 4 + 1 = 14 along the full chain; every other chain is smaller.
        let q = VariationQuery::real(2.0, &[0.0, 3.0, 1.0, 2.0]).unwrap();
        let res = vr_exact(&q);
        assert!((res.value - 14f64.sqrt()).abs() < 1e-14);
        assert_eq!(res.chain, vec![0, 1, 2, 3]);
        assert!((vr_bruteforce(&q).unwrap() - 14f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn chain_labels_and_tie_break() {
        // [0, 1, 0, 1] at r=1: the full chain is the unique maximizer.
        let q = VariationQuery::with_labels(1.0, vec![c(0.0), c(1.0), c(0.0), c(1.0)], vec![2, 4, 8, 16]).unwrap();
        let res = vr_exact(&q);
        assert_eq!(res.value, 3.0);
        assert_eq!(res.chain, vec![2, 4, 8, 16]);

        // [0, 1, 1, 0]: (0,1,2,3), (0,1,3) and (0,2,3) all reach 2; the
        // zero step keeps (0,1,2,3) lexicographically first.
        let q = VariationQuery::real(2.0, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(vr_exact(&q).chain, vec![0, 1, 2, 3]);

        // Trailing flat part is not appended.
        let q = VariationQuery::real(2.0, &[0.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(vr_exact(&q).chain, vec![0, 1]);
    }

    #[test]
    fn result_json_shape() {
        let q = VariationQuery::real(2.0, &[0.0, 3.0, 1.0, 2.0]).unwrap();
        let v = serde_json::to_value(vr_exact(&q)).unwrap();
        assert_eq!(v["r"], 2.0);
        assert_eq!(v["chain"], serde_json::json!([0, 1, 2, 3]));
        assert!(v["value"].is_f64());
    }

    #[test]
    fn r_one_is_total_variation() {
        let mut rng = seeded_rng(1);
        for _ in 0..50 {
            let a: Vec<Complex64> = (0..10).map(|_| random_complex(&mut rng)).collect();
            let tv: f64 = a.windows(2).map(|w| (w[0] - w[1]).norm()).sum();
            let q = VariationQuery::new(1.0, a).unwrap();
            assert!((vr_exact(&q).value - tv).abs() < 1e-12);
            assert!((vr_bruteforce(&q).unwrap() - tv).abs() < 1e-12);
        }
    }

    #[test]
    fn dp_matches_bruteforce() {
        let mut rng = seeded_rng(2);
        for _ in 0..200 {
            let len = rng.random_range(1..=10);
            let r = EXPONENTS[rng.random_range(0..4)];
            let a: Vec<Complex64> = (0..len).map(|_| random_complex(&mut rng)).collect();
            let q = VariationQuery::new(r, a).unwrap();
            let exact = vr_exact(&q);
            let brute = vr_bruteforce(&q).unwrap();
            assert!((exact.value - brute).abs() <= 1e-12 * brute.max(1.0));
            // The reported chain realizes the value.
            let idx: Vec<usize> = exact.chain.iter().map(|&t| t as usize).collect();
            let s: f64 = idx.windows(2).map(|w| jump(q.values()[w[0]], q.values()[w[1]], r)).sum();
            assert!((s.powf(1.0 / r) - exact.value).abs() <= 1e-12 * exact.value.max(1.0));
        }
    }

    #[test]
    fn dyadic_floor_values() {
        assert_eq!(dyadic_floor(8.0).unwrap(), 8.0);
        assert_eq!(dyadic_floor(5.0).unwrap(), 4.0);
        assert_eq!(dyadic_floor(0.7).unwrap(), 0.5);
        assert_eq!(dyadic_floor(1.0).unwrap(), 1.0);
        assert_eq!(dyadic_floor(0.25).unwrap(), 0.25);
        for m in -20..40 {
            let p = 2f64.powi(m);
            assert_eq!(dyadic_floor(p).unwrap(), p);
            assert_eq!(dyadic_floor(p * 1.999).unwrap(), p);
            assert_eq!(dyadic_floor(p * 0.999).unwrap(), p / 2.0);
        }
        assert!(dyadic_floor(0.0).is_err());
        assert!(dyadic_floor(-3.0).is_err());
        assert!(dyadic_floor(f64::NAN).is_err());
    }

    #[test]
    fn dyadic_partition_examples() {
        let whole = dyadic_partition(0, 8, 3).unwrap();
        assert_eq!(whole.intervals, vec![DyadicInterval { start: 0, end: 8, scale: 3 }]);

        let p = dyadic_partition(1, 7, 3).unwrap();
        let spans: Vec<(u64, u64)> = p.intervals.iter().map(|i| (i.start, i.end)).collect();
        assert_eq!(spans, vec![(1, 2), (2, 4), (4, 6), (6, 7)]);
        assert!(p.check(1, 7, 3).ok());

        assert!(dyadic_partition(3, 3, 2).is_err());
        assert!(dyadic_partition(0, 5, 2).is_err());
    }

    #[test]
    fn dyadic_partition_exhaustive_small() {
        for l in 0..=6 {
            for b in 1..=(1u64 << l) {
                for a in 0..b {
                    let check = dyadic_partition(a, b, l).unwrap().check(a, b, l);
                    assert!(check.ok(), "a={a} b={b} l={l}: {check:?}");
                }
            }
        }
    }

    #[test]
    fn partition_check_detects_defects() {
        let bad = DyadicPartition {
            intervals: vec![
                DyadicInterval { start: 0, end: 1, scale: 0 },
                DyadicInterval { start: 1, end: 2, scale: 0 },
                DyadicInterval { start: 2, end: 3, scale: 0 },
            ],
        };
        let c = bad.check(0, 3, 2);
        assert!(c.disjoint && c.covers && !c.ok());
        let gap = DyadicPartition { intervals: vec![DyadicInterval { start: 0, end: 1, scale: 0 }] };
        assert!(!gap.check(0, 2, 1).covers);
        let misaligned = DyadicPartition { intervals: vec![DyadicInterval { start: 1, end: 3, scale: 1 }] };
        assert!(!misaligned.check(1, 3, 2).aligned);
    }

    #[test]
    fn variation_properties_hold() {
        let rep = check_variation_properties(500, &mut seeded_rng(3));
        assert_eq!(rep.violations(), 0, "{rep:?}");
        assert!(rep.checks.iter().all(|c| c.instances > 0));
    }

    #[test]
    fn lr_bound_on_delta() {
        for r in [1.0, 2.0, 3.0] {
            let q = VariationQuery::real(r, &[0.0, 0.0, 5.0, 0.0]).unwrap();
            let v = vr_exact(&q).value;
            assert!(v <= 2.0 * 5.0);
            assert!(v >= 5.0);
        }
    }

    #[test]
    fn chain_lemma() {
        let mut rng = seeded_rng(4);
        let flat = vec![c(1.0); 9];
        assert_eq!(chain_bound(&flat, 3, 8, 2.0), 0.0);
        for s in [1.0, 1.5, 2.0, 3.0] {
            for l in 0..=6 {
                for m in [-1, 0, 1, (1 << l) / 2, 1 << l, (1 << l) + 3] {
                    let check = check_chain_lemma(l, m, s, 20, &mut rng).unwrap();
                    assert_eq!(check.violations, 0, "l={l} m={m} s={s}: {check:?}");
                }
            }
        }
        // s = 1, M = 2^l: the g = 0 term alone dominates the total variation.
        let a: Vec<Complex64> = (0..9).map(|_| random_complex(&mut rng)).collect();
        let tv: f64 = a.windows(2).map(|w| (w[0] - w[1]).norm()).sum();
        assert!(chain_bound(&a, 3, 8, 1.0) >= tv);
        assert!(check_chain_lemma(11, 0, 2.0, 1, &mut rng).is_err());
    }

    #[test]
    fn radius_sets() {
        assert_eq!(RadiusSet::full(3).indices(), &[0, 1, 2, 3]);
        assert_eq!(RadiusSet::parity(5, 0).unwrap().indices(), &[0, 2, 4]);
        assert_eq!(RadiusSet::parity(5, 1).unwrap().indices(), &[1, 3, 5]);
        assert!(RadiusSet::parity(5, 2).is_err());
        assert_eq!(RadiusSet::dyadic(10).indices(), &[1, 2, 4, 8]);
        assert_eq!(RadiusSet::interval(10, 3, 5).unwrap().indices(), &[3, 4, 5]);
        assert!(RadiusSet::interval(4, 3, 5).is_err());
        assert!(RadiusSet::from_indices(4, vec![1, 1]).is_err());
        assert!(RadiusSet::from_indices(4, vec![1, 5]).is_err());
    }

    #[test]
    fn pointwise_variation() {
        let dim = CubeDim::new(6).unwrap();
        let mut rng = seeded_rng(5);
        let family: Vec<CubeFunction> = (0..5).map(|_| crate::rng::random_function(dim, &mut rng)).collect();
        let v = vr_pointwise(&family, 2.0).unwrap();
        let mut sq = 0.0;
        for x in 0..dim.size() {
            let seq: Vec<Complex64> = family.iter().map(|f| f.values()[x]).collect();
            let q = VariationQuery::new(2.0, seq).unwrap();
            let b = vr_bruteforce(&q).unwrap();
            assert!((v.values()[x].re - b).abs() < 1e-12);
            sq += b * b;
        }
        assert!((v.norm_l2() - sq.sqrt()).abs() < 1e-10);

        let single = vr_pointwise(&family[..1], 2.0).unwrap();
        assert_eq!(single.norm_linf(), 0.0);
        assert!(vr_pointwise(&[], 2.0).is_err());
        let other = CubeFunction::zeros(CubeDim::new(5).unwrap(), Side::Physical);
        assert!(vr_pointwise(&[family[0].clone(), other], 2.0).is_err());
    }
}
