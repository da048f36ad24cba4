//! Normalized Krawtchouk polynomials
//!
//! ```text
//! κ^(n)_k(x) = C(n,k)^{-1} Σ_j (-1)^j C(x,j) C(n-x,k-j),   max(0, x+k-n) ≤ j ≤ min(k, x)
//! ```
//!
//! are the eigenvalues of the spherical mean `S_k` on the spectral level
//! `|y| = x`. Tables are computed exactly in rational arithmetic; the float
//! table is a rounding of the exact one, since the alternating sum cancels
//! catastrophically in floating point.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest dimension accepted by [`build_table`].
pub const MAX_TABLE_DIM: usize = 64;

/// Pascal's triangle rows `0..=n` as big integers.
#[derive(Debug, Clone)]
pub struct Binomials {
    rows: Vec<Vec<BigInt>>,
}

impl Binomials {
    pub fn new(n: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
        rows.push(vec![BigInt::one()]);
        for m in 1..=n {
            let prev = &rows[m - 1];
            let mut row = Vec::with_capacity(m + 1);
            row.push(BigInt::one());
            for j in 1..m {
                row.push(&prev[j - 1] + &prev[j]);
            }
            row.push(BigInt::one());
            rows.push(row);
        }
        Self { rows }
    }

    /// `C(m, j)`, zero outside `0 ≤ j ≤ m`.
    pub fn get(&self, m: usize, j: usize) -> BigInt {
        if j > m {
            BigInt::zero()
        } else {
            self.rows[m][j].clone()
        }
    }

    fn get_ref(&self, m: usize, j: usize) -> &BigInt {
        &self.rows[m][j]
    }
}

fn check_args(n: usize, k: usize, x: usize) -> Result<()> {
    if k > n {
        return Err(Error::IndexOutOfRange { name: "k", value: k, n });
    }
    if x > n {
        return Err(Error::IndexOutOfRange { name: "x", value: x, n });
    }
    Ok(())
}

fn kraw_with(binom: &Binomials, n: usize, k: usize, x: usize) -> Rational {
    let lo = (x + k).saturating_sub(n);
    let hi = k.min(x);
    let mut sum = BigInt::zero();
    for j in lo..=hi {
        let term = binom.get_ref(x, j) * binom.get_ref(n - x, k - j);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Rational::new(sum, binom.get(n, k))
}

/// Exact value of `κ^(n)_k(x)`.
pub fn kraw_exact(n: usize, k: usize, x: usize) -> Result<Rational> {
    check_args(n, k, x)?;
    Ok(kraw_with(&Binomials::new(n), n, k, x))
}

/// `κ^(n)_k(x)` for `k ∈ {0..n}` at one level `x`; no dimension cap.
pub fn kraw_level(n: usize, x: usize) -> Result<Vec<Rational>> {
    check_args(n, 0, x)?;
    let binom = Binomials::new(n);
    Ok((0..=n).map(|k| kraw_with(&binom, n, k, x)).collect())
}

/// Exact and floating-point `κ^(n)_k(x)` for all `k, x ∈ {0..n}`.
#[derive(Debug, Clone)]
pub struct KrawtchoukTable {
    n: usize,
    exact: Vec<Vec<Rational>>,
    float: Vec<Vec<f64>>,
}

pub fn build_table(n: usize) -> Result<KrawtchoukTable> {
    if n == 0 || n > MAX_TABLE_DIM {
        return Err(Error::InvalidParameter(format!(
            "krawtchouk table dimension {n} outside 1..={MAX_TABLE_DIM}"
        )));
    }
    let binom = Binomials::new(n);
    let exact: Vec<Vec<Rational>> =
        (0..=n).map(|k| (0..=n).map(|x| kraw_with(&binom, n, k, x)).collect()).collect();
    let float = exact
        .iter()
        .map(|row| row.iter().map(|v| v.to_f64().expect("bounded rational converts")).collect())
        .collect();
    Ok(KrawtchoukTable { n, exact, float })
}

impl KrawtchoukTable {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn exact(&self, k: usize, x: usize) -> &Rational {
        &self.exact[k][x]
    }

    #[inline]
    pub fn float(&self, k: usize, x: usize) -> f64 {
        self.float[k][x]
    }

    /// `κ_k(x)` for fixed `k` as a function of the level `x`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.float[k]
    }

    /// `κ_k(level)` for `k = 0..=n`: the multiplier sequence seen by a
    /// character `χ_y` with `|y| = level`.
    pub fn column(&self, level: usize) -> Vec<f64> {
        (0..=self.n).map(|k| self.float[k][level]).collect()
    }

    /// Writes `n,k,x,numerator,denominator,float` rows, `k` major.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "k", "x", "numerator", "denominator", "float"])?;
        for k in 0..=self.n {
            for x in 0..=self.n {
                let v = &self.exact[k][x];
                w.write_record([
                    self.n.to_string(),
                    k.to_string(),
                    x.to_string(),
                    v.numer().to_string(),
                    v.denom().to_string(),
                    self.float[k][x].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Failure counts for the four elementary properties of a table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FactReport {
    pub n: usize,
    pub checked: usize,
    pub bounded_by_one: usize,
    pub one_at_origin: usize,
    pub symmetric: usize,
    pub reflection: usize,
    pub float_mismatch: usize,
}

impl FactReport {
    pub fn failures(&self) -> usize {
        self.bounded_by_one + self.one_at_origin + self.symmetric + self.reflection + self.float_mismatch
    }
}

/// Checks `|κ| ≤ 1`, `κ_k(0) = 1`, `κ_k(x) = κ_x(k)`, `κ_k(x) = (-1)^k κ_k(n-x)`
/// exactly, and that the float table is within `1e-12` of the exact one.
pub fn check_facts(table: &KrawtchoukTable) -> FactReport {
    let n = table.n;
    let one = Rational::one();
    let mut report = FactReport { n, ..Default::default() };
    for k in 0..=n {
        for x in 0..=n {
            report.checked += 1;
            let v = table.exact(k, x);
            if v.abs() > one {
                report.bounded_by_one += 1;
            }
            if x == 0 && *v != one {
                report.one_at_origin += 1;
            }
            if v != table.exact(x, k) {
                report.symmetric += 1;
            }
            let mirrored = table.exact(k, n - x);
            let expected = if k % 2 == 0 { mirrored.clone() } else { -mirrored };
            if *v != expected {
                report.reflection += 1;
            }
            let f = table.float(k, x);
            if f.abs() > 1.0 + 1e-12 || (f - v.to_f64().unwrap_or(f64::NAN)).abs() > 1e-12 {
                report.float_mismatch += 1;
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub checked: usize,
    pub failures: usize,
}

/// Verifies `κ^(n)_k(x) - κ^(n)_k(x-1) = -(2k/n) κ^(n-1)_{k-1}(x-1)` for all `k, x ∈ {1..n}`.
pub fn check_difference_identity(n: usize) -> Result<IdentityReport> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("difference identity needs n >= 2, got {n}")));
    }
    let big = build_table(n)?;
    let small = build_table(n - 1)?;
    Ok(difference_identity_between(&big, &small))
}

/// Same as [`check_difference_identity`] with both tables supplied.
pub fn difference_identity_between(big: &KrawtchoukTable, small: &KrawtchoukTable) -> IdentityReport {
    let n = big.n;
    assert_eq!(small.n + 1, n, "tables must have consecutive dimensions");
    let mut report = IdentityReport { n, checked: 0, failures: 0 };
    for k in 1..=n {
        let factor = Rational::new(BigInt::from(2 * k), BigInt::from(n));
        for x in 1..=n {
            let lhs = big.exact(k, x) - big.exact(k, x - 1);
            let rhs = -(&factor * small.exact(k - 1, x - 1));
            report.checked += 1;
            if lhs != rhs {
                report.failures += 1;
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Argmax {
    pub k: usize,
    pub x: usize,
}

/// JSON record `{ "n", "constant_name", "value", "argmax": {k, x} }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub n: usize,
    pub constant_name: String,
    pub value: f64,
    pub argmax: Option<Argmax>,
}

#[derive(Debug, Clone)]
pub struct BoundScanA {
    /// `max |κ_k(x) - 1| · n / (kx)` over `k, x ≥ 1`, exactly.
    pub max_ratio: Rational,
    pub record: ScanRecord,
}

/// Sharpness scan for `|κ_k(x) - 1| ≤ 2kx/n`.
pub fn bound_scan_a(n: usize) -> Result<BoundScanA> {
    let table = build_table(n)?;
    Ok(bound_scan_a_table(&table))
}

pub fn bound_scan_a_table(table: &KrawtchoukTable) -> BoundScanA {
    let n = table.n;
    let one = Rational::one();
    let mut best = Rational::zero();
    let mut arg = None;
    for k in 1..=n {
        for x in 1..=n {
            let ratio = (table.exact(k, x) - &one).abs() * Rational::new(BigInt::from(n), BigInt::from(k * x));
            if arg.is_none() || ratio > best {
                best = ratio;
                arg = Some(Argmax { k, x });
            }
        }
    }
    let record = ScanRecord {
        n,
        constant_name: "lemma_a_ratio".into(),
        value: best.to_f64().unwrap_or(f64::NAN),
        argmax: arg,
    };
    BoundScanA { max_ratio: best, record }
}

/// Empirical constants `C_b = max |κ_k(x)| kx/n` over `1 ≤ k, x ≤ n/2` and
/// `C_c = max |κ_k(x) - κ_{k-1}(x)| k` over `1 ≤ k ≤ n/2, 0 ≤ x ≤ n/2`.
pub fn bound_scan_b_c(n: usize) -> Result<(ScanRecord, ScanRecord)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("bound scan needs n >= 2, got {n}")));
    }
    let table = build_table(n)?;
    Ok(bound_scan_b_c_table(&table))
}

pub fn bound_scan_b_c_table(table: &KrawtchoukTable) -> (ScanRecord, ScanRecord) {
    let n = table.n;
    let half = n / 2;
    let nf = n as f64;
    let mut cb = ScanRecord { n, constant_name: "lemma_b_constant".into(), value: 0.0, argmax: None };
    let mut cc = ScanRecord { n, constant_name: "lemma_c_constant".into(), value: 0.0, argmax: None };
    for k in 1..=half {
        for x in 0..=half {
            if x >= 1 {
                let v = table.float(k, x).abs() * (k * x) as f64 / nf;
                if cb.argmax.is_none() || v > cb.value {
                    cb.value = v;
                    cb.argmax = Some(Argmax { k, x });
                }
            }
            let v = (table.float(k, x) - table.float(k - 1, x)).abs() * k as f64;
            if cc.argmax.is_none() || v > cc.value {
                cc.value = v;
                cc.argmax = Some(Argmax { k, x });
            }
        }
    }
    (cb, cc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpConstant {
    /// `+∞` when every scanned entry vanished.
    pub c_hat: f64,
    /// `(n, k, x)` attaining the minimum.
    pub argmin: Option<(usize, usize, usize)>,
    pub entries: usize,
}

/// Smallest `c` with `|κ^(n)_k(x)| ≤ e^{-c kx/n}` over `2 ≤ n ≤ n_max`,
/// `1 ≤ k, x ≤ n/2`; exact zeros are skipped.
pub fn estimate_exp_constant(n_max: usize) -> Result<ExpConstant> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!("n_max must be >= 2, got {n_max}")));
    }
    let mut out = ExpConstant { c_hat: f64::INFINITY, argmin: None, entries: 0 };
    for n in 2..=n_max {
        let table = build_table(n)?;
        for k in 1..=n / 2 {
            for x in 1..=n / 2 {
                if table.exact(k, x).is_zero() {
                    continue;
                }
                out.entries += 1;
                let c = -(n as f64) * table.float(k, x).abs().ln() / (k * x) as f64;
                if c < out.c_hat {
                    out.c_hat = c;
                    out.argmin = Some((n, k, x));
                }
            }
        }
    }
    Ok(out)
}
