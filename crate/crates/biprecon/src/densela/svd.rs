//! One-sided Jacobi (Hestenes) singular value decomposition.
//!
//! Columns are rotated pairwise until mutually orthogonal, which computes
//! small singular values to high relative accuracy.

use super::matrix::{ComplexMatrix, ComplexVector};
use super::DenseError;
use crate::config::JACOBI_MAX_SWEEPS;
use num_complex::Complex64;

/// Singular values in non-increasing order with optional thin factors
/// `m = U·diag(σ)·Vᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub values: Vec<f64>,
    pub u: Option<ComplexMatrix>,
    pub v: Option<ComplexMatrix>,
}

/// Singular value decomposition; factors are kept when `want_factors` is set.
pub fn svd(m: &ComplexMatrix, want_factors: bool) -> Result<SvdResult, DenseError> {
    if m.rows() < m.cols() {
        let t = svd(&m.adjoint(), want_factors)?;
        return Ok(SvdResult {
            values: t.values,
            u: t.v,
            v: t.u,
        });
    }
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<ComplexVector> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<ComplexVector> = if want_factors {
        (0..cols)
            .map(|j| {
                let mut e = vec![Complex64::new(0.0, 0.0); cols];
                e[j] = Complex64::new(1.0, 0.0);
                e
            })
            .collect()
    } else {
        Vec::new()
    };
    let tol = (rows.max(1) as f64) * f64::EPSILON;
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in p + 1..cols {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: Complex64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let r = gamma.norm();
                if r <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = (gamma / r).conj();
                let tau = (beta - alpha) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let (lo, hi) = a.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let xp = *x;
                    let yq = *y;
                    *x = xp * c - yq * e * s;
                    *y = xp * s + yq * e * c;
                }
                if want_factors {
                    let (lo, hi) = v.split_at_mut(q);
                    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let xp = *x;
                        let yq = *y;
                        *x = xp * c - yq * e * s;
                        *y = xp * s + yq * e * c;
                    }
                }
            }
        }
        sweeps += 1;
        if !rotated || sweeps >= JACOBI_MAX_SWEEPS {
            break;
        }
    }
    let norms: Vec<f64> = a.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let values: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    if !want_factors {
        return Ok(SvdResult {
            values,
            u: None,
            v: None,
        });
    }
    let mut u = ComplexMatrix::zeros(rows, cols);
    let mut vm = ComplexMatrix::zeros(cols, cols);
    for (col, &i) in order.iter().enumerate() {
        let sigma = norms[i];
        if sigma > 0.0 {
            for k in 0..rows {
                u[(k, col)] = a[i][k] / sigma;
            }
        }
        for k in 0..cols {
            vm[(k, col)] = v[i][k];
        }
    }
    Ok(SvdResult {
        values,
        u: Some(u),
        v: Some(vm),
    })
}

/// Singular values only, non-increasing.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    svd(m, false).map(|r| r.values).unwrap_or_default()
}

/// Spectral norm `σ₁`.
pub fn norm_2(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}
