//! Counterexample reproduction, multiplier scans and the dimension-free probes.
//!
//! Two routes compute `‖V_r(S_k f : k ∈ Z)‖₂ / ‖f‖₂`:
//!
//! * the operator route materializes every `S_k f` on the cube and applies
//!   [`vr_pointwise`];
//! * for a character `χ_y` the ratio collapses to `V_r(κ_k(|y|) : k ∈ Z)`,
//!   since `S_k χ_y = κ_k(|y|) χ_y` and `|χ_y| ≡ 1`.
//!
//! Counterexamples use the operator route up to [`MATERIALIZE_MAX_N`] and the
//! character route beyond it; both are compared in the tests.

use std::time::Instant;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{character, fwht, CubeDim, CubeFunction, PointIndex, Side};
use crate::error::{Error, Result};
use crate::krawtchouk::{
    bound_scan_a_table, bound_scan_b_c_table, build_table, check_facts, difference_identity_between, estimate_exp_constant, kraw_level, KrawtchoukTable,
    MAX_TABLE_DIM,
};
use crate::operators::{
    antipodal_check, noise_binomial, noise_multiplier, reflection_identity_violation, semigroup_axioms_check,
    spherical_mean_direct, spherical_mean_multiplier, spherical_means,
};
use crate::report::{ExperimentReport, Record};
use crate::rng::{gaussian_spectrum, random_function, seeded_rng};
use crate::variation::{
    check_chain_lemma, check_variation_properties, dyadic_partition, vr_bruteforce, vr_exact, vr_pointwise, vr_value,
    RadiusSet, VariationQuery,
};

/// Largest `n` for which counterexamples materialize all `S_k f`.
pub const MATERIALIZE_MAX_N: usize = 16;

/// Relative slack allowed when comparing a computed ratio with a lower bound.
const BOUND_RTOL: f64 = 1e-12;

/// How the truncation sequence `a_n` / `b_n` depends on `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum TruncationRule {
    /// `n^alpha`, `alpha ∈ (0, 1)`.
    Power { alpha: f64 },
    /// A fixed positive value.
    Constant { value: f64 },
}

impl TruncationRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Power { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(Error::InvalidParameter(format!("power rule needs alpha in (0, 1), got {alpha}")))
            }
            Self::Constant { value } if !(value > 0.0 && value.is_finite()) => {
                Err(Error::InvalidParameter(format!("constant rule needs a positive value, got {value}")))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, n: usize) -> f64 {
        match *self {
            Self::Power { alpha } => (n as f64).powf(alpha),
            Self::Constant { value } => value,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Self::Power { alpha } => format!("n^{alpha}"),
            Self::Constant { value } => format!("{value}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    pub r_list: Vec<f64>,
    pub q: Option<u8>,
    pub truncation: TruncationRule,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_list: vec![8],
            r_list: vec![2.0],
            q: None,
            truncation: TruncationRule::Power { alpha: 0.5 },
            seed: 0,
            trials: 100,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.r_list.is_empty() {
            return Err(Error::InvalidParameter("n_list and r_list must be nonempty".into()));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n == 0) {
            return Err(Error::DimensionOutOfRange(n));
        }
        if let Some(&r) = self.r_list.iter().find(|&&r| !(r >= 1.0) || !r.is_finite()) {
            return Err(Error::InvalidExponent(r));
        }
        if self.q.is_some_and(|q| q > 1) {
            return Err(Error::InvalidParameter("q must be 0 or 1".into()));
        }
        self.truncation.validate()
    }

    fn echo(&self, report: ExperimentReport) -> ExperimentReport {
        report
            .param("n_list", &self.n_list)
            .param("r_list", &self.r_list)
            .param("q", self.q)
            .param("truncation", self.truncation)
            .param("seed", self.seed)
            .param("trials", self.trials)
    }

    /// Parity classes to scan: the configured one, or both.
    fn parities(&self) -> Vec<u8> {
        self.q.map_or(vec![0, 1], |q| vec![q])
    }
}

/// `V_r(κ_k(level) : k ∈ radii)`.
pub fn character_ratio(table: &KrawtchoukTable, level: usize, radii: &RadiusSet, r: f64) -> Result<f64> {
    let seq: Vec<Complex64> = radii.indices().iter().map(|&k| Complex64::new(table.float(k, level), 0.0)).collect();
    vr_value(&seq, r)
}

/// `‖V_r(S_k f : k ∈ radii)‖₂ / ‖f‖₂` by materializing every `S_k f`.
pub fn norm_ratio(f: &CubeFunction, radii: &RadiusSet, r: f64, table: &KrawtchoukTable) -> Result<f64> {
    let norm = f.norm_l2();
    if norm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let means = spherical_means(f, radii.indices(), table)?;
    Ok(vr_pointwise(&means, r)?.norm_l2() / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Operator,
    Character,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRecord {
    pub n: usize,
    pub r: f64,
    /// `|y|` of the witness character.
    pub weight: usize,
    pub ratio: f64,
    pub bound: f64,
    pub holds: bool,
    pub route: Route,
}

fn ratio_for_weight(table: &KrawtchoukTable, weight: usize, r: f64) -> Result<(f64, Route)> {
    let n = table.n();
    let radii = RadiusSet::full(n);
    if n <= MATERIALIZE_MAX_N {
        let dim = CubeDim::new(n)?;
        let chi = character(dim, PointIndex::with_weight(dim, weight)?);
        Ok((norm_ratio(&chi, &radii, r, table)?, Route::Operator))
    } else {
        Ok((character_ratio(table, weight, &radii, r)?, Route::Character))
    }
}

fn holds(ratio: f64, bound: f64) -> bool {
    ratio >= bound * (1.0 - BOUND_RTOL)
}

/// Ratio for `χ_{1_n}` against the lower bound `2 n^{1/r}`.
pub fn counterexample_all_ones(n: usize, r: f64) -> Result<CounterexampleRecord> {
    let table = build_table(n)?;
    counterexample_all_ones_table(&table, r)
}

pub fn counterexample_all_ones_table(table: &KrawtchoukTable, r: f64) -> Result<CounterexampleRecord> {
    let n = table.n();
    let (ratio, route) = ratio_for_weight(table, n, r)?;
    let bound = 2.0 * (n as f64).powf(r.recip());
    Ok(CounterexampleRecord { n, r, weight: n, ratio, bound, holds: holds(ratio, bound), route })
}

/// `(2/3) ⌊n / (3 a_n)⌋^{1/r}`.
pub fn truncated_bound(n: usize, a_n: f64, r: f64) -> f64 {
    let count = (n as f64 / (3.0 * a_n)).floor();
    if count <= 0.0 {
        0.0
    } else {
        2.0 / 3.0 * count.powf(r.recip())
    }
}

fn check_truncated(n: usize, weight: usize, a_n: f64) -> Result<()> {
    if !(a_n >= 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!("a_n must be >= 1/3, got {a_n}")));
    }
    if weight > n || (weight as f64) < n as f64 - a_n {
        return Err(Error::NoWitness(format!("|y| = {weight} is not >= n - a_n = {}", n as f64 - a_n)));
    }
    Ok(())
}

/// Ratio for `χ_y`, `|y| = weight`, against the truncated lower bound.
/// Requires `weight ≥ n - a_n` and `a_n ≥ 1/3`.
pub fn truncated_ratio_at(table: &KrawtchoukTable, weight: usize, a_n: f64, r: f64) -> Result<CounterexampleRecord> {
    let n = table.n();
    check_truncated(n, weight, a_n)?;
    let (ratio, route) = ratio_for_weight(table, weight, r)?;
    let bound = truncated_bound(n, a_n, r);
    Ok(CounterexampleRecord { n, r, weight, ratio, bound, holds: holds(ratio, bound), route })
}

/// As [`truncated_ratio_at`], for any `n`: evaluates the single level
/// `weight` exactly instead of building a full table.
pub fn truncated_ratio_level(n: usize, weight: usize, a_n: f64, r: f64) -> Result<CounterexampleRecord> {
    check_truncated(n, weight, a_n)?;
    let seq: Vec<Complex64> = kraw_level(n, weight)?
        .iter()
        .map(|v| Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0))
        .collect();
    let ratio = vr_value(&seq, r)?;
    let bound = truncated_bound(n, a_n, r);
    Ok(CounterexampleRecord { n, r, weight, ratio, bound, holds: holds(ratio, bound), route: Route::Character })
}

/// Picks the witness `y = (1,...,1,0)` with `|y| = n - 1`, the largest length
/// below `n` allowed by `|y| ≥ n - a_n`.
pub fn counterexample_truncated(n: usize, r: f64, a_n: f64) -> Result<CounterexampleRecord> {
    if n == 0 {
        return Err(Error::DimensionOutOfRange(n));
    }
    if !(a_n >= 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!("a_n must be >= 1/3, got {a_n}")));
    }
    let weight = n - 1;
    if (weight as f64) < n as f64 - a_n {
        return Err(Error::NoWitness(format!("a_n = {a_n} < 1 admits only |y| = n")));
    }
    truncated_ratio_at(&build_table(n)?, weight, a_n, r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryRow {
    pub n: usize,
    pub r: f64,
    pub b_n: f64,
    pub d_n: f64,
    pub a_n: f64,
    /// `None` when `⌈n - d_n⌉ - 1 < 0`.
    pub weight: Option<usize>,
    /// `|y| < n - d_n`, i.e. `y` lies outside `E_n`.
    pub excluded: bool,
    /// `|y| ≥ n - a_n`, so the truncated counterexample applies.
    pub covered: bool,
    pub record: Option<CounterexampleRecord>,
}

/// For each `n`, builds the witness `|y| = ⌈n - d_n⌉ - 1` with
/// `d_n = max(1/9, b_n)` and `a_n = √(n d_n)`, and evaluates it. Rows where
/// the witness cannot be built or is not yet covered are kept with
/// `record = None`.
pub fn corollary_rows(config: &ExperimentConfig) -> Result<Vec<CorollaryRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for &n in &config.n_list {
        let table = if n <= MAX_TABLE_DIM { Some(build_table(n)?) } else { None };
        let b_n = config.truncation.value(n);
        let d_n = b_n.max(1.0 / 9.0);
        let a_n = (n as f64 * d_n).sqrt();
        let w = (n as f64 - d_n).ceil() - 1.0;
        for &r in &config.r_list {
            let weight = (w >= 0.0).then_some(w as usize);
            let excluded = weight.is_some_and(|w| (w as f64) < n as f64 - d_n);
            let covered = weight.is_some_and(|w| (w as f64) >= n as f64 - a_n);
            let record = match weight {
                Some(w) if excluded && covered => Some(match &table {
                    Some(t) => truncated_ratio_at(t, w, a_n, r)?,
                    None => truncated_ratio_level(n, w, a_n, r)?,
                }),
                _ => None,
            };
            rows.push(CorollaryRow { n, r, b_n, d_n, a_n, weight, excluded, covered, record });
        }
    }
    Ok(rows)
}

pub fn corollary_truncation_scan(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let name = "corollary_truncation";
    let mut rep = config.echo(ExperimentReport::start(name));
    for row in corollary_rows(config)? {
        match (&row.record, row.weight) {
            (Some(rec), Some(w)) => {
                let witness = format!("|y|={w} a_n={} d_n={}", row.a_n, row.d_n);
                rep.push(Record::new(name, row.n, "ratio", rec.ratio).r(row.r).witness(witness.clone()));
                rep.push(Record::new(name, row.n, "lower_bound", rec.bound).r(row.r).witness(witness));
                rep.push(Record::new(name, row.n, "bound_holds", f64::from(u8::from(rec.holds))).r(row.r));
            }
            _ => {
                let why = match row.weight {
                    None => "witness length negative".to_string(),
                    Some(w) => format!("|y|={w} not covered: needs |y| >= n - a_n = {}", row.n as f64 - row.a_n),
                };
                rep.push(Record::new(name, row.n, "skipped", 1.0).r(row.r).witness(why));
            }
        }
    }
    Ok(rep.finish())
}

/// `v(m) = V_r(κ_k(m) : k ∈ radii)` for every level `m ∈ {0..n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterScan {
    pub n: usize,
    pub r: f64,
    pub q: Option<u8>,
    pub levels: Vec<f64>,
    pub max: f64,
    pub argmax: usize,
}

pub fn character_scan(table: &KrawtchoukTable, radii: &RadiusSet, r: f64) -> Result<CharacterScan> {
    let n = table.n();
    let levels = (0..=n).map(|m| character_ratio(table, m, radii, r)).collect::<Result<Vec<_>>>()?;
    let (argmax, max) = levels
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (m, v)| if v > acc.1 { (m, v) } else { acc });
    let q = match radii.kind() {
        crate::variation::RadiusKind::Parity(q) => Some(q),
        _ => None,
    };
    Ok(CharacterScan { n, r, q, levels, max, argmax })
}

/// Character sup of the fixed-parity variation; a lower bound for the
/// operator norm of `f ↦ V_r(S_k f : k ≡ q)`.
pub fn parity_character_scan(r: f64, q: u8, table: &KrawtchoukTable) -> Result<CharacterScan> {
    character_scan(table, &RadiusSet::parity(table.n(), q)?, r)
}

pub fn full_character_scan(r: f64, table: &KrawtchoukTable) -> Result<CharacterScan> {
    character_scan(table, &RadiusSet::full(table.n()), r)
}

pub fn parity_scan_report(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let name = "parity_scan";
    let mut rep = config.echo(ExperimentReport::start(name));
    let rows: Vec<Vec<Record>> = config
        .n_list
        .par_iter()
        .map(|&n| -> Result<Vec<Record>> {
            let table = build_table(n)?;
            let mut out = Vec::new();
            for &r in &config.r_list {
                let full = full_character_scan(r, &table)?;
                out.push(
                    Record::new(name, n, "full_character_max", full.max)
                        .r(r)
                        .witness(format!("|y|={}", full.argmax)),
                );
                for q in config.parities() {
                    let s = parity_character_scan(r, q, &table)?;
                    out.push(
                        Record::new(name, n, "parity_character_max", s.max)
                            .r(r)
                            .q(Some(q))
                            .witness(format!("|y|={}", s.argmax)),
                    );
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    rows.into_iter().flatten().for_each(|r| rep.push(r));
    Ok(rep.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormComparison {
    pub full: f64,
    /// `(q, ratio)` for each requested parity class.
    pub parity: Vec<(u8, f64)>,
}

/// Full-range and fixed-parity ratios of one function; both parities when `q` is `None`.
pub fn full_vs_parity_norm(f: &CubeFunction, r: f64, q: Option<u8>, table: &KrawtchoukTable) -> Result<NormComparison> {
    let n = f.dim().n();
    let full = norm_ratio(f, &RadiusSet::full(n), r, table)?;
    let classes = q.map_or(vec![0, 1], |q| vec![q]);
    let parity = classes
        .into_iter()
        .map(|q| Ok((q, norm_ratio(f, &RadiusSet::parity(n, q)?, r, table)?)))
        .collect::<Result<_>>()?;
    Ok(NormComparison { full, parity })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSpectrumScan {
    pub n: usize,
    pub r: f64,
    pub trials: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub argmax_trial: usize,
}

/// Random unit spectra on `{|y| ≤ n/2}`; full-range ratios and their maximum,
/// a lower bound for the half-spectrum operator norm.
pub fn proposition_halfspectrum_scan(n: usize, r: f64, trials: usize, seed: u64) -> Result<HalfSpectrumScan> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("half-spectrum scan needs n >= 2, got {n}")));
    }
    let dim = CubeDim::new(n)?;
    let table = build_table(n)?;
    let radii = RadiusSet::full(n);
    let mut rng = seeded_rng(seed);
    let mut ratios = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut f = gaussian_spectrum(dim, |y| 2 * y.count_ones() as usize <= n, &mut rng);
        f.into_physical_in_place()?;
        ratios.push(norm_ratio(&f, &radii, r, &table)?);
    }
    let (argmax_trial, max_ratio) =
        ratios.iter().copied().enumerate().fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(HalfSpectrumScan { n, r, trials, ratios, max_ratio, argmax_trial })
}

pub fn halfspectrum_report(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let name = "half_spectrum";
    let mut rep = config.echo(ExperimentReport::start(name));
    for &n in &config.n_list {
        let table = build_table(n)?;
        for &r in &config.r_list {
            let scan = proposition_halfspectrum_scan(n, r, config.trials, config.seed)?;
            rep.push(
                Record::new(name, n, "random_max_ratio", scan.max_ratio)
                    .r(r)
                    .witness(format!("trial={} seed={}", scan.argmax_trial, config.seed)),
            );
            // The best character inside the half spectrum, for comparison.
            let radii = RadiusSet::full(n);
            let (level, v) = (0..=n / 2)
                .map(|m| (m, character_ratio(&table, m, &radii, r).unwrap_or(0.0)))
                .fold((0, 0.0), |acc, (m, v)| if v > acc.1 { (m, v) } else { acc });
            rep.push(Record::new(name, n, "character_max_ratio", v).r(r).witness(format!("|y|={level}")));
        }
    }
    Ok(rep.finish())
}

/// A function of `x ∈ {0..⌊n/2⌋}` and its maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierScan {
    pub n: usize,
    pub name: String,
    pub values: Vec<f64>,
    pub max: f64,
    pub argmax: usize,
}

fn multiplier_scan(n: usize, name: &str, values: Vec<f64>) -> MultiplierScan {
    let (argmax, max) =
        values.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    MultiplierScan { n, name: name.into(), values, max, argmax }
}

/// `Φ(x) = Σ_{k ∈ {1,2,4,...} ∩ {1..⌊n/2⌋}} |κ_k(x) - e^{-kx/n}|²`.
pub fn phi_scan(n: usize) -> Result<MultiplierScan> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("phi scan needs n >= 2, got {n}")));
    }
    Ok(phi_scan_table(&build_table(n)?))
}

pub fn phi_scan_table(table: &KrawtchoukTable) -> MultiplierScan {
    let n = table.n();
    let half = n / 2;
    let ks = RadiusSet::dyadic(half);
    let values = (0..=half)
        .map(|x| {
            ks.indices()
                .iter()
                .map(|&k| {
                    let d = table.float(k, x) - (-((k * x) as f64) / n as f64).exp();
                    d * d
                })
                .sum()
        })
        .collect();
    multiplier_scan(n, "phi", values)
}

/// One difference term of `Ψ`: weight `2^{g/2}` on `|κ_{k0}(x) - κ_{k1}(x)|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PsiTerm {
    pub l: u32,
    pub g: u32,
    pub h: usize,
    pub k0: usize,
    pub k1: usize,
}

/// All `(l, g, h)` with `g ≤ l`, `1 ≤ h ≤ 2^g` and `h 2^{l-g} + 2^l ≤ ⌊n/2⌋`.
pub fn psi_terms(n: usize) -> Vec<PsiTerm> {
    let half = n / 2;
    let mut terms = Vec::new();
    let mut l = 0u32;
    while (1usize << l) < half {
        let base = 1usize << l;
        for g in 0..=l {
            let step = 1usize << (l - g);
            for h in 1..=(1usize << g) {
                if h * step + base > half {
                    break;
                }
                terms.push(PsiTerm { l, g, h, k0: (h - 1) * step + base, k1: h * step + base });
            }
        }
        l += 1;
    }
    terms
}

/// `Ψ(x) = Σ_l Σ_{g ≤ l} 2^{g/2} Σ_h |κ_{(h-1)2^{l-g}+2^l}(x) - κ_{h2^{l-g}+2^l}(x)|²`.
pub fn psi_scan(n: usize) -> Result<MultiplierScan> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("psi scan needs n >= 2, got {n}")));
    }
    Ok(psi_scan_table(&build_table(n)?))
}

pub fn psi_scan_table(table: &KrawtchoukTable) -> MultiplierScan {
    let n = table.n();
    let terms = psi_terms(n);
    let values = (0..=n / 2)
        .map(|x| {
            terms
                .iter()
                .map(|t| {
                    let d = table.float(t.k0, x) - table.float(t.k1, x);
                    2f64.powf(t.g as f64 / 2.0) * d * d
                })
                .sum()
        })
        .collect();
    multiplier_scan(n, "psi", values)
}

pub fn phi_psi_report(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let name = "phi_psi";
    let mut rep = config.echo(ExperimentReport::start(name));
    for &n in &config.n_list {
        if n < 2 {
            continue;
        }
        let table = build_table(n)?;
        for scan in [phi_scan_table(&table), psi_scan_table(&table)] {
            rep.push(
                Record::new(name, n, &format!("{}_max", scan.name), scan.max).witness(format!("x={}", scan.argmax)),
            );
            rep.push(Record::new(name, n, &format!("{}_at_0", scan.name), scan.values[0]));
        }
    }
    Ok(rep.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CounterexampleKind {
    AllOnes,
    Truncated,
    Corollary,
}

pub fn counterexample_report(config: &ExperimentConfig, kind: CounterexampleKind) -> Result<ExperimentReport> {
    config.validate()?;
    match kind {
        CounterexampleKind::Corollary => corollary_truncation_scan(config),
        CounterexampleKind::AllOnes | CounterexampleKind::Truncated => {
            let name = match kind {
                CounterexampleKind::AllOnes => "counterexample_all_ones",
                _ => "counterexample_truncated",
            };
            let mut rep = config.echo(ExperimentReport::start(name));
            for &n in &config.n_list {
                let table = build_table(n)?;
                for &r in &config.r_list {
                    let rec = match kind {
                        CounterexampleKind::AllOnes => counterexample_all_ones_table(&table, r)?,
                        _ => {
                            let a_n = config.truncation.value(n).max(1.0 / 3.0);
                            if a_n < 1.0 {
                                rep.push(
                                    Record::new(name, n, "skipped", 1.0)
                                        .r(r)
                                        .witness(format!("a_n={a_n} admits only |y|=n")),
                                );
                                continue;
                            }
                            truncated_ratio_at(&table, n - 1, a_n, r)?
                        }
                    };
                    let witness = format!("|y|={} route={:?}", rec.weight, rec.route).to_lowercase();
                    rep.push(Record::new(name, n, "ratio", rec.ratio).r(r).witness(witness));
                    rep.push(Record::new(name, n, "lower_bound", rec.bound).r(r));
                    rep.push(Record::new(name, n, "bound_holds", f64::from(u8::from(rec.holds))).r(r));
                }
            }
            Ok(rep.finish())
        }
    }
}

/// Outcome of [`verify_suite`]; `passed` is false if any check failed.
pub struct VerifyOutcome {
    pub report: ExperimentReport,
    pub passed: bool,
}

/// Runs every module's invariant checks at dimension `n` and records one
/// line per check: the worst violation (or failure count) and `pass`/`FAIL`.
pub fn verify_suite(n: usize, seed: u64, trials: usize) -> Result<VerifyOutcome> {
    let dim = CubeDim::new(n)?;
    let name = "verify";
    let mut rep = ExperimentReport::start(name).param("n", n).param("seed", seed).param("trials", trials);
    let mut passed = true;
    let mut check = |rep: &mut ExperimentReport, metric: &str, value: f64, ok: bool| {
        passed &= ok;
        rep.push(Record::new(name, n, metric, value).witness(if ok { "pass" } else { "FAIL" }));
    };
    let mut rng = seeded_rng(seed);

    let tables = (1..=n.max(2)).map(build_table).collect::<Result<Vec<_>>>()?;
    let table = &tables[n - 1];
    let fact_failures: usize = tables.iter().take(n).map(|t| check_facts(t).failures()).sum();
    check(&mut rep, "krawtchouk_fact_failures", fact_failures as f64, fact_failures == 0);
    let diff_failures: usize = (2..=n).map(|m| difference_identity_between(&tables[m - 1], &tables[m - 2]).failures).sum();
    check(&mut rep, "difference_identity_failures", diff_failures as f64, diff_failures == 0);
    let lemma_a = bound_scan_a_table(table);
    let two = crate::krawtchouk::Rational::from_integer(2.into());
    check(&mut rep, "lemma_a_max_ratio", lemma_a.record.value, lemma_a.max_ratio <= two);

    // Empirical constants: reported, not asserted.
    if n >= 2 {
        let (b, c) = bound_scan_b_c_table(table);
        rep.push(Record::new(name, n, &b.constant_name, b.value));
        rep.push(Record::new(name, n, &c.constant_name, c.value));
        let exp = estimate_exp_constant(n)?;
        let witness = exp.argmin.map(|(m, k, x)| format!("n={m} k={k} x={x}")).unwrap_or_default();
        rep.push(Record::new(name, n, "exp_constant_c_hat", exp.c_hat).witness(witness));
    }

    let op_trials = trials.clamp(1, 10);
    let mut sph = 0.0f64;
    let mut noise = 0.0f64;
    let mut refl = 0.0f64;
    let mut anti = 0.0f64;
    for _ in 0..op_trials {
        let f = random_function(dim, &mut rng);
        for k in 0..=n {
            sph = sph.max(spherical_mean_direct(&f, k)?.max_abs_diff(&spherical_mean_multiplier(&f, k, table)?)?);
        }
        for t in [0.01, 0.1, 1.0, 2f64.ln(), 5.0] {
            noise = noise.max(noise_binomial(&f, t, table)?.max_abs_diff(&noise_multiplier(&f, t)?)?);
        }
        refl = refl.max(reflection_identity_violation(&f, table)?);
        anti = anti.max(antipodal_check(&f)?.max_violation);
    }
    check(&mut rep, "spherical_direct_vs_multiplier", sph, sph <= 1e-10);
    check(&mut rep, "noise_binomial_vs_multiplier", noise, noise <= 1e-10);
    check(&mut rep, "reflection_identity", refl, refl <= 1e-10);
    check(&mut rep, "antipodal_identity", anti, anti <= 1e-10);
    let semi = semigroup_axioms_check(dim, &[0.01, 0.1, 1.0, 2f64.ln(), 5.0], op_trials, &mut rng)?;
    check(&mut rep, "semigroup_axioms", semi.worst(), semi.worst() <= 1e-10);

    let mut dp = 0.0f64;
    for _ in 0..trials {
        let len = rand::Rng::random_range(&mut rng, 1..=13);
        let r = [1.0, 1.5, 2.0, 3.0][rand::Rng::random_range(&mut rng, 0..4)];
        let values: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rand::Rng::random_range(&mut rng, -1.0..1.0), rand::Rng::random_range(&mut rng, -1.0..1.0)))
            .collect();
        let q = VariationQuery::new(r, values)?;
        dp = dp.max((vr_exact(&q).value - vr_bruteforce(&q)?).abs());
    }
    check(&mut rep, "vr_dp_vs_bruteforce", dp, dp <= 1e-12);
    let props = check_variation_properties(trials, &mut rng);
    for c in &props.checks {
        check(&mut rep, &format!("variation_{}", c.name), c.worst_slack, c.violations == 0);
    }
    // Reported, not asserted.
    rep.push(Record::new(name, n, "variation_dyadic_empirical_constant", props.dyadic_empirical_constant));
    let mut chain_violations = 0;
    for s in [1.5, 2.0, 3.0] {
        for l in 0..=6 {
            chain_violations += check_chain_lemma(l, 1 << l, s, (trials / 10).max(1), &mut rng)?.violations;
        }
    }
    check(&mut rep, "chain_lemma_violations", chain_violations as f64, chain_violations == 0);
    let mut partition_failures = 0;
    for l in 0..=8u32 {
        for b in 1..=(1u64 << l) {
            for a in 0..b {
                if !dyadic_partition(a, b, l)?.check(a, b, l).ok() {
                    partition_failures += 1;
                }
            }
        }
    }
    check(&mut rep, "dyadic_partition_failures", partition_failures as f64, partition_failures == 0);

    for r in [1.0, 2.0, 3.0] {
        let rec = counterexample_all_ones_table(table, r)?;
        let exact = (rec.ratio - rec.bound).abs() <= 1e-9 * rec.bound;
        check(&mut rep, &format!("all_ones_ratio_r{r}"), rec.ratio, rec.holds && exact);
    }
    Ok(VerifyOutcome { report: rep.finish(), passed })
}

/// Rough memory need of a full `S_k` sweep at dimension `n`, in bytes.
fn sweep_bytes(n: usize) -> u128 {
    (n as u128 + 3) * (1u128 << n) * 16
}

const BENCH_MEMORY_LIMIT: u128 = 2 << 30;

/// Wall-clock timings of the FWHT, a full `S_k` sweep and `vr_pointwise`.
pub fn bench(n: usize, r: f64, seed: u64) -> Result<ExperimentReport> {
    let dim = CubeDim::new(n)?;
    if sweep_bytes(n) > BENCH_MEMORY_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "n = {n} needs about {} MiB for the S_k sweep, limit is {} MiB",
            sweep_bytes(n) >> 20,
            BENCH_MEMORY_LIMIT >> 20
        )));
    }
    let name = "bench";
    let mut rep = ExperimentReport::start(name).param("n", n).param("r", r).param("seed", seed);
    let mut rng = seeded_rng(seed);
    let f = random_function(dim, &mut rng);
    let points = dim.size() as f64;

    let mut buf: Vec<Complex64> = f.values().to_vec();
    let t0 = Instant::now();
    fwht(&mut buf);
    let fwht_s = t0.elapsed().as_secs_f64();
    rep.push(Record::new(name, n, "fwht_seconds", fwht_s));
    rep.push(Record::new(name, n, "fwht_points_per_second", points / fwht_s.max(1e-12)));

    let table = build_table(n)?;
    let radii = RadiusSet::full(n);
    let t0 = Instant::now();
    let means = spherical_means(&f, radii.indices(), &table)?;
    let sweep_s = t0.elapsed().as_secs_f64();
    rep.push(Record::new(name, n, "sk_sweep_seconds", sweep_s));
    rep.push(Record::new(name, n, "sk_sweep_points_per_second", points * (n + 1) as f64 / sweep_s.max(1e-12)));

    let t0 = Instant::now();
    let v = vr_pointwise(&means, r)?;
    let vr_s = t0.elapsed().as_secs_f64();
    rep.push(Record::new(name, n, "vr_pointwise_seconds", vr_s).r(r));
    rep.push(Record::new(name, n, "vr_pointwise_points_per_second", points / vr_s.max(1e-12)).r(r));
    rep.push(Record::new(name, n, "full_range_ratio", v.norm_l2() / f.norm_l2()).r(r));
    debug_assert_eq!(v.side(), Side::Physical);
    Ok(rep.finish())
}
