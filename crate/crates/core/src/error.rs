use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid spin value {0}: twice the spin must be a nonnegative integer")]
    InvalidSpin(f64),

    #[error("total spin {total} is not a half-integer (K = {k} must be odd)")]
    EvenK { total: f64, k: u64 },

    #[error("K must be a positive odd integer, got {0}")]
    InvalidK(i64),

    #[error("index {index} out of range 0..{bound}")]
    OutOfRange { index: usize, bound: usize },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("function is not odd: f({x}) = {fx}, f(-x) = {fmx}")]
    NotOdd { x: f64, fx: f64, fmx: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
