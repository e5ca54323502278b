//! Dense complex linear algebra kernels.
//!
//! Everything here works on full dense storage: Jacobi sweeps for Hermitian
//! eigenproblems, one-sided Jacobi for singular values, Hessenberg reduction
//! with shifted QR for general spectra, Cholesky and partial-pivot LU for
//! solves, plus Matrix Market and CSV file formats.

mod eigen;
mod factor;
pub mod io;
mod matrix;
mod svd;

pub use eigen::{
    eigen_residuals, general_eigen, hermitian_eigen, hermitian_max_eigenpair, EigenResult,
};
pub use factor::{cholesky_hpd, inverse, solve_linear, LuFactors};
pub use matrix::{axpy, dot, from_real, norm2, scaled, sub, ComplexMatrix, ComplexVector};
pub use svd::{norm_2, singular_values, svd, SvdResult};

use thiserror::Error;

/// Failures raised by the dense kernels.
#[derive(Debug, Clone, Error)]
pub enum DenseError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NonHermitian { deviation: f64 },
    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("matrix is singular (pivot {index} has modulus {modulus:e})")]
    Singular { index: usize, modulus: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension {0} exceeds the dense cap")]
    TooLarge(usize),
    #[error("eigenvalue iteration did not converge; {} of {} eigenvalues found", .partial.eigenvalues.len(), .dim)]
    NoConvergence { partial: Box<EigenResult>, dim: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DenseError {
    fn from(e: std::io::Error) -> Self {
        DenseError::Io(e.to_string())
    }
}
