//! Dense complex linear algebra over small tensor-product Hilbert spaces.
//!
//! Everything here is a value type: operators and states are immutable once
//! built and every operation returns a fresh value, so they can be shared
//! freely between trial workers.

mod eigen;
mod expm;
mod operator;
mod state;

pub use eigen::{hermitian_eigensystem, Eigensystem, Spectrum};
pub use expm::matrix_exponential;
pub use operator::{tensor_product, OperatorMatrix};
pub use state::StateVector;

pub use num_complex::Complex64;

use thiserror::Error;

/// Largest Hilbert-space dimension the dense routines accept.
pub const MAX_DIMENSION: usize = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tensor factorization {dims:?} does not multiply to {len}")]
    BadFactorization { dims: Vec<usize>, len: usize },
    #[error("matrix has {entries} entries, which is not {dim}x{dim}")]
    NotSquare { dim: usize, entries: usize },
    #[error("dimension {0} exceeds the dense limit of {MAX_DIMENSION}")]
    TooLarge(usize),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max |A†A - I| = {0:e})")]
    NotUnitary(f64),
    #[error("cannot normalize a zero vector")]
    ZeroNorm,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, NumericError>;

/// Applies `op` to `s`.
pub fn apply(op: &OperatorMatrix, s: &StateVector) -> Result<StateVector> {
    op.apply(s)
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.inner(b)
}
