use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands (or an operand and a parameter set) disagree on `n`.
    DimensionMismatch { expected: usize, found: usize },
    NotSquare { rows: usize, cols: usize },
    InvalidPartition(String),
    /// Two blocks share an eigenvalue of `A` (`which = "alpha"`) or `B`.
    RepeatedEigenvalue { which: &'static str, first: usize, second: usize },
    /// A coefficient `x / (d_i - d_j)` or `x / (b_i + b_j)` has a vanishing denominator.
    SingularDenominator { i: usize, j: usize },
    NotPositiveDefinite { min_eigenvalue: f64 },
    NotSymmetric { asymmetry: f64 },
    /// `lambda * I + A` (or `A + alpha * I`) is singular.
    Pole { lambda: f64, index: usize },
    WrongOperatorKind { expected: &'static str },
    InvalidParameter(String),
    CarrierMismatch,
    Unsupported(&'static str),
    /// Implicit step failed to converge.
    NonConvergence { step: usize },
    EigenFailure,
    /// A rank decision sat within a decade of its threshold.
    UnstableRank { quantity: &'static str },
    /// The point is on a non-generic stratum (e.g. centralizer too large).
    NonGeneric { reason: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is not square ({rows}x{cols})"),
            Error::InvalidPartition(msg) => write!(f, "invalid block partition: {msg}"),
            Error::RepeatedEigenvalue { which, first, second } => write!(
                f,
                "SpectralParams: {which}s of blocks {first} and {second} coincide (must be pairwise distinct)"
            ),
            Error::SingularDenominator { i, j } => {
                write!(f, "singular denominator for index pair ({i}, {j})")
            }
            Error::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "operator is not positive definite (smallest eigenvalue {min_eigenvalue:e})")
            }
            Error::NotSymmetric { asymmetry } => {
                write!(f, "operator matrix is not symmetric (asymmetry {asymmetry:e})")
            }
            Error::Pole { lambda, index } => {
                write!(f, "lambda = {lambda} hits a pole at diagonal index {index}")
            }
            Error::WrongOperatorKind { expected } => write!(f, "operation requires a {expected} operator"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::CarrierMismatch => write!(f, "function family does not live on this carrier"),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
            Error::NonConvergence { step } => {
                write!(f, "implicit midpoint iteration did not converge at step {step}")
            }
            Error::EigenFailure => write!(f, "eigenvalue computation failed"),
            Error::UnstableRank { quantity } => {
                write!(f, "rank of {quantity} is within a decade of the tolerance")
            }
            Error::NonGeneric { reason } => write!(f, "non-generic point: {reason}"),
        }
    }
}

impl core::error::Error for Error {}
