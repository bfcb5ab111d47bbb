use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("multinomial parts sum to {sum}, expected {n}")]
    MultinomialMismatch { n: u64, sum: u64 },
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("mixed truncation degrees: {found} vs {expected}")]
    MixedDegree { found: usize, expected: usize },
    #[error("Laurent window [{lo}, {hi}] of variable {var} does not cover exponent {needed}")]
    WindowTooSmall { var: usize, lo: i32, hi: i32, needed: i32 },
    #[error("variable count mismatch: {found} vs {expected}")]
    Arity { found: usize, expected: usize },
    #[error("quadrature oracle supports N <= 2, got N = {0}")]
    OracleUnsupported(usize),
    #[error("invalid Monte Carlo parameters: {0}")]
    InvalidMc(String),
    #[error("accumulator is not finite: {0}")]
    NonFinite(String),
}
