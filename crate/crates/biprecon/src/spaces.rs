//! Discrete trial and test spaces described by their Gram matrices.
//!
//! A space never materializes its synthesis operator. Everything follows
//! from the Gram spectrum: the norm `‖u‖ = √(uᴴHu)`, the dual norm
//! `‖b‖' = ‖H^{-1/2}b‖₂`, and the extremal synthesis constants.

use crate::densela::{
    cholesky_hpd, hermitian_eigen, norm2, ComplexMatrix, ComplexVector, DenseError,
};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error("dimension mismatch: space has dimension {expected}, vector has {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Mesh sizes of a mesh-based space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshMeta {
    pub h_min: f64,
    pub h_max: f64,
}

/// Extremal constants of the synthesis operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthesisConstants {
    /// `√λ_min(H)`.
    pub gamma_lambda: f64,
    /// `√λ_max(H)`.
    pub norm_lambda: f64,
    /// `norm_lambda / gamma_lambda`.
    pub k_lambda: f64,
}

/// A finite-dimensional space with a Hermitian positive definite Gram matrix.
#[derive(Debug, Clone)]
pub struct DiscreteSpace {
    label: String,
    gram: ComplexMatrix,
    mesh: Option<MeshMeta>,
    sobolev_order: Option<f64>,
    sqrt: ComplexMatrix,
    inv_sqrt: ComplexMatrix,
    chol: ComplexMatrix,
    lambda_min: f64,
    lambda_max: f64,
}

impl DiscreteSpace {
    /// Validates the Gram matrix and caches its square roots and extremal
    /// eigenvalues.
    pub fn new(label: impl Into<String>, gram: ComplexMatrix) -> Result<Self, SpaceError> {
        let chol = cholesky_hpd(&gram)?;
        let n = gram.rows();
        let (sqrt, inv_sqrt, lambda_min, lambda_max) = if gram.is_diagonal() {
            let d: Vec<f64> = gram.diagonal().iter().map(|z| z.re).collect();
            let s: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
            let is: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
            let lmin = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let lmax = d.iter().cloned().fold(0.0, f64::max);
            (ComplexMatrix::from_real_diag(&s), ComplexMatrix::from_real_diag(&is), lmin, lmax)
        } else {
            let eig = hermitian_eigen(&gram)?;
            let vals = eig.real_values();
            let v = eig.eigenvectors.expect("hermitian eigen keeps vectors");
            if vals.iter().any(|&l| l <= 0.0) {
                return Err(DenseError::NotPositiveDefinite {
                    index: vals.iter().position(|&l| l <= 0.0).unwrap_or(0),
                    pivot: vals[n - 1],
                }
                .into());
            }
            let sq: Vec<f64> = vals.iter().map(|l| l.sqrt()).collect();
            let isq: Vec<f64> = sq.iter().map(|s| 1.0 / s).collect();
            let vh = v.adjoint();
            let sqrt = v.matmul(&ComplexMatrix::from_real_diag(&sq)).matmul(&vh).hermitian_part();
            let inv_sqrt = v.matmul(&ComplexMatrix::from_real_diag(&isq)).matmul(&vh).hermitian_part();
            (sqrt, inv_sqrt, vals[n - 1], vals[0])
        };
        Ok(Self {
            label: label.into(),
            gram,
            mesh: None,
            sobolev_order: None,
            sqrt,
            inv_sqrt,
            chol,
            lambda_min,
            lambda_max,
        })
    }

    /// Space with the identity Gram.
    pub fn euclidean(label: impl Into<String>, n: usize) -> Self {
        Self::new(label, ComplexMatrix::identity(n)).expect("identity is positive definite")
    }

    pub fn with_mesh(mut self, h_min: f64, h_max: f64) -> Self {
        self.mesh = Some(MeshMeta { h_min, h_max });
        self
    }

    pub fn with_sobolev_order(mut self, s: f64) -> Self {
        self.sobolev_order = Some(s);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    pub fn mesh(&self) -> Option<MeshMeta> {
        self.mesh
    }

    pub fn sobolev_order(&self) -> Option<f64> {
        self.sobolev_order
    }

    /// Hermitian square root `H^{1/2}`.
    pub fn sqrt_gram(&self) -> &ComplexMatrix {
        &self.sqrt
    }

    /// Hermitian inverse square root `H^{-1/2}`.
    pub fn inv_sqrt_gram(&self) -> &ComplexMatrix {
        &self.inv_sqrt
    }

    /// Cholesky factor `L` with `LLᴴ = H`.
    pub fn cholesky(&self) -> &ComplexMatrix {
        &self.chol
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    fn check(&self, u: &[Complex64]) -> Result<(), SpaceError> {
        if u.len() != self.dim() {
            return Err(SpaceError::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            });
        }
        Ok(())
    }

    /// Inner product `(u, v)_H = vᴴHu`.
    pub fn inner(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let hu = self.gram.matvec(u);
        v.iter().zip(&hu).map(|(a, b)| a.conj() * b).sum()
    }

    /// Space norm `√(uᴴHu)`.
    pub fn norm(&self, u: &[Complex64]) -> Result<f64, SpaceError> {
        self.check(u)?;
        Ok(self.inner(u, u).re.max(0.0).sqrt())
    }

    /// Dual norm `‖H^{-1/2}b‖₂ = √(bᴴH⁻¹b)`, evaluated with the Cholesky factor.
    pub fn dual_norm(&self, b: &[Complex64]) -> Result<f64, SpaceError> {
        self.check(b)?;
        Ok(norm2(&forward_substitute(&self.chol, b)))
    }

    /// Synthesis-operator constants from the Gram spectrum.
    pub fn synthesis_constants(&self) -> SynthesisConstants {
        let gamma_lambda = self.lambda_min.sqrt();
        let norm_lambda = self.lambda_max.sqrt();
        SynthesisConstants {
            gamma_lambda,
            norm_lambda,
            k_lambda: norm_lambda / gamma_lambda,
        }
    }

    /// True when both spaces have the same dimension and Gram matrix.
    pub fn same_geometry(&self, other: &DiscreteSpace) -> bool {
        self.dim() == other.dim()
            && self.gram.sub(&other.gram).max_abs() <= 1e-14 * self.gram.max_abs().max(other.gram.max_abs())
    }
}

/// Solves `Lx = b` for lower-triangular `L`.
fn forward_substitute(l: &ComplexMatrix, b: &[Complex64]) -> ComplexVector {
    let n = b.len();
    let mut x = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let mut s = x[i];
        for j in 0..i {
            s -= row[j] * x[j];
        }
        x[i] = s / row[i];
    }
    x
}

/// Synthesis constants of a space.
pub fn synthesis_constants(sp: &DiscreteSpace) -> SynthesisConstants {
    sp.synthesis_constants()
}

/// Norm of a coefficient vector in the space.
pub fn norm_x(sp: &DiscreteSpace, u: &[Complex64]) -> Result<f64, SpaceError> {
    sp.norm(u)
}

/// `H_Y^{-1/2}·A·H_X^{-1/2}` for `A: X → Y'`, whose singular values are the
/// discrete inf-sup and continuity constants.
pub fn normalized_operator(a: &ComplexMatrix, domain: &DiscreteSpace, range_dual: &DiscreteSpace) -> ComplexMatrix {
    range_dual.inv_sqrt_gram().matmul(a).matmul(domain.inv_sqrt_gram())
}
