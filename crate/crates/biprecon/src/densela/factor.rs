//! Cholesky and partial-pivot LU factorizations.

use super::matrix::{ComplexMatrix, ComplexVector};
use super::DenseError;
use crate::config::{HERMITIAN_TOL, LU_PIVOT_TOL};
use num_complex::Complex64;

/// Lower-triangular `L` with `L·Lᴴ = m` for Hermitian positive definite `m`.
pub fn cholesky_hpd(m: &ComplexMatrix) -> Result<ComplexMatrix, DenseError> {
    let n = m.require_square()?;
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL * m.max_abs().max(f64::MIN_POSITIVE) {
        return Err(DenseError::NonHermitian { deviation });
    }
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(DenseError::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// LU factors with row permutation: `P·m = L·U`, unit lower `L` stored
/// below the diagonal of `lu`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factors a square matrix with partial pivoting.
    pub fn new(m: &ComplexMatrix) -> Result<Self, DenseError> {
        let n = m.require_square()?;
        let scale = m.norm_fro();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (piv, modulus) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if modulus <= LU_PIVOT_TOL * scale || modulus == 0.0 {
                return Err(DenseError::Singular { index: k, modulus });
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `m·x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<ComplexVector, DenseError> {
        let n = self.dim();
        if b.len() != n {
            return Err(DenseError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x: ComplexVector = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        Ok(x)
    }

    /// Solves `m·X = B` column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> Result<ComplexMatrix, DenseError> {
        let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j))?;
            out.set_column(j, &x);
        }
        Ok(out)
    }

    /// Explicit inverse.
    pub fn inverse(&self) -> Result<ComplexMatrix, DenseError> {
        self.solve_matrix(&ComplexMatrix::identity(self.dim()))
    }
}

/// Solves `m·x = rhs` by partial-pivot LU.
pub fn solve_linear(m: &ComplexMatrix, rhs: &[Complex64]) -> Result<ComplexVector, DenseError> {
    LuFactors::new(m)?.solve(rhs)
}

/// Explicit inverse by partial-pivot LU.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix, DenseError> {
    LuFactors::new(m)?.inverse()
}
