use thiserror::Error;

use crate::cube::Side;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} out of range 1..={max}", max = crate::cube::MAX_DIM)]
    DimensionOutOfRange(usize),
    #[error("array length {len} does not match 2^{n}")]
    LengthMismatch { n: usize, len: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected:?} side, got {actual:?}")]
    SideMismatch { expected: Side, actual: Side },
    #[error("point index {bits:#b} out of range for n = {n}")]
    PointOutOfRange { n: usize, bits: u64 },
    #[error("{name} = {value} out of range 0..={n}")]
    IndexOutOfRange { name: &'static str, value: usize, n: usize },
    #[error("krawtchouk table dimension {table} does not match function dimension {function}")]
    TableMismatch { table: usize, function: usize },
    #[error("noise time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("variation exponent must satisfy r >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("empty sequence")]
    EmptySequence,
    #[error("sequence of length {len} exceeds brute-force limit {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("sequence labels must be strictly increasing")]
    UnsortedLabels,
    #[error("dyadic floor requires t > 0, got {0}")]
    NonPositive(f64),
    #[error("invalid dyadic range [{a}, {b}) for l = {l}")]
    InvalidRange { a: u64, b: u64, l: u32 },
    #[error("invalid radius set: {0}")]
    InvalidRadiusSet(String),
    #[error("no admissible witness: {0}")]
    NoWitness(String),
    #[error("zero function has no norm ratio")]
    ZeroFunction,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed cube function json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
