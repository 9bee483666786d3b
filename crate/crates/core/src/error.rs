use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("physical constant `{name}` must be strictly positive, got {value}")]
    NonPositiveConstant { name: &'static str, value: f64 },

    #[error("direction is not a unit vector (|e| = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("separation must be strictly positive, got {0}")]
    NonPositiveSeparation(f64),

    #[error("a dipole needs at least two levels, got {0}")]
    TooFewLevels(usize),

    #[error("moment matrix has {got} elements, expected {expected} for {dim} levels")]
    MomentShape { dim: usize, expected: usize, got: usize },

    #[error(
        "moment matrix is not Hermitian: element ({row},{col}) differs from conj of ({col},{row}) by {deviation:e}"
    )]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("level index {index} out of range for {dim} levels")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("angular oracle needs at least {min} points per dimension, got {got}")]
    TooFewQuadPoints { min: usize, got: usize },

    #[error("angular oracle requires a strictly positive frequency, got {0}")]
    NonPositiveOracleFrequency(f64),

    #[error(
        "angular oracle structure violated: odd part {odd:e} exceeds {tolerance:e} of scale"
    )]
    OracleStructure { odd: f64, tolerance: f64 },

    #[error("invalid regulator plan: {0}")]
    InvalidPlan(&'static str),

    #[error(
        "extrapolation to zero regulator did not converge: error estimate {error_estimate:e} exceeds {tolerance:e}"
    )]
    NonConvergence {
        error_estimate: f64,
        tolerance: f64,
        /// Regulated values, one per regulator, in plan order.
        regulated: Vec<Complex64>,
        /// Extrapolants of increasing polynomial order.
        estimates: Vec<Complex64>,
    },

    #[error("memory kernel needs a non-negative time, got {0}")]
    NegativeTime(f64),

    #[error("internal consistency check failed: {what} (defect {defect:e})")]
    Inconsistent { what: &'static str, defect: f64 },

    #[error("classical interaction has zero norm, relative deviation is undefined")]
    UndefinedDeviation,

    #[error("invalid input: {0}")]
    Invalid(&'static str),
}
