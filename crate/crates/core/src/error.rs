//! Error type shared by all modules of the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, QuiltError>;

/// Errors raised by frame construction, certification and reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub enum QuiltError {
    /// Input lengths or coefficient counts do not match.
    DimensionMismatch { expected: usize, found: usize },
    /// Invalid configuration (non-divisor lattice steps, bad partitions, ...).
    Config(String),
    /// Mathematically invalid input (zero reference signal, `L < 4`, ...).
    Domain(String),
    /// The system has no positive lower frame bound; duals and inverses
    /// do not exist.
    NotAFrame { lower: f64, upper: f64 },
    /// A quilt assembly produced no atoms.
    DegenerateQuilt(String),
    /// A documented precondition of the operation does not hold.
    Precondition(String),
    /// No region enlargement up to the whole plane yields a certificate.
    CertificationImpossible(String),
    /// An iterative solver hit its iteration cap before reaching tolerance.
    NonConvergence { iterations: usize, residual: f64 },
    /// The frame operator has a (near-)zero diagonal entry, so diagonal
    /// preconditioning is unavailable.
    PreconditioningUnavailable { index: usize, value: f64 },
}

impl fmt::Display for QuiltError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuiltError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            QuiltError::Config(msg) => write!(f, "configuration error: {msg}"),
            QuiltError::Domain(msg) => write!(f, "domain error: {msg}"),
            QuiltError::NotAFrame { lower, upper } => write!(
                f,
                "not a frame: lower bound {lower:e} is negligible against upper bound {upper:e}"
            ),
            QuiltError::DegenerateQuilt(msg) => write!(f, "degenerate quilt: {msg}"),
            QuiltError::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            QuiltError::CertificationImpossible(msg) => {
                write!(f, "certification impossible: {msg}")
            }
            QuiltError::NonConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
            QuiltError::PreconditioningUnavailable { index, value } => write!(
                f,
                "diagonal preconditioning unavailable: entry {index} is {value:e}"
            ),
        }
    }
}

impl std::error::Error for QuiltError {}
