//! Eigenvalue kernels.
//!
//! Hermitian matrices use cyclic complex Jacobi rotations. The extreme
//! eigenpair needed inside field-of-values sweeps comes from Householder
//! tridiagonalization, implicit QL and inverse iteration. General matrices
//! are reduced to Hessenberg form and deflated with single-shift complex QR.

use super::matrix::{norm2, ComplexMatrix, ComplexVector};
use super::svd::singular_values;
use super::DenseError;
use crate::config::{
    HERMITIAN_TOL, JACOBI_MAX_SWEEPS, JACOBI_TOL, MAX_DIM, QR_ITERS_PER_EIGENVALUE,
    TRIDIAG_MAX_ITERS,
};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Eigenvalues with optional eigenvectors stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Eigenvalues. Hermitian input gives real values in descending order;
    /// general input gives descending modulus.
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Option<ComplexMatrix>,
}

impl EigenResult {
    /// Real parts of the eigenvalues.
    pub fn real_values(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// Moduli of the eigenvalues.
    pub fn moduli(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.norm()).collect()
    }
}

fn check_hermitian(m: &ComplexMatrix) -> Result<usize, DenseError> {
    let n = m.require_square()?;
    if n > MAX_DIM {
        return Err(DenseError::TooLarge(n));
    }
    let scale = m.max_abs();
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(DenseError::NonHermitian { deviation });
    }
    Ok(n)
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Eigenvalues are returned real and descending; the eigenvector matrix is
/// unitary with column `j` belonging to eigenvalue `j`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<EigenResult, DenseError> {
    let n = check_hermitian(m)?;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let fro = a.norm_fro();
    let mut converged = n <= 1 || fro == 0.0;
    let mut sweep = 0;
    while !converged && sweep < JACOBI_MAX_SWEEPS {
        sweep += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 || r < f64::MIN_POSITIVE * 1e4 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e = phase.conj();
                // columns: A ← A·J
                for k in 0..n {
                    let x = a[(k, p)];
                    let y = a[(k, q)];
                    a[(k, p)] = x * c - y * e * s;
                    a[(k, q)] = x * s + y * e * c;
                }
                // rows: A ← Jᴴ·A
                for k in 0..n {
                    let x = a[(p, k)];
                    let y = a[(q, k)];
                    a[(p, k)] = x * c - y * phase * s;
                    a[(q, k)] = x * s + y * phase * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let x = v[(k, p)];
                    let y = v[(k, q)];
                    v[(k, p)] = x * c - y * e * s;
                    v[(k, q)] = x * s + y * e * c;
                }
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        converged = off <= JACOBI_TOL * fro;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| Complex64::new(a[(i, i)].re, 0.0)).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, col)] = v[(k, i)];
        }
    }
    let result = EigenResult {
        eigenvalues,
        eigenvectors: Some(vectors),
    };
    if converged {
        Ok(result)
    } else {
        Err(DenseError::NoConvergence {
            partial: Box::new(result),
            dim: n,
        })
    }
}

/// Householder vector `v` and scalar `τ` with `(I − τvvᴴ)x = αe₁`.
fn householder(x: &[Complex64]) -> Option<(ComplexVector, f64, Complex64)> {
    let norm = norm2(x);
    if norm == 0.0 {
        return None;
    }
    let x0 = x[0];
    let phase = if x0.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        x0 / x0.norm()
    };
    let alpha = -phase * norm;
    let mut v: ComplexVector = x.to_vec();
    v[0] -= alpha;
    let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if vnorm2 == 0.0 {
        return None;
    }
    Some((v, 2.0 / vnorm2, alpha))
}

/// Implicit QL on a real symmetric tridiagonal matrix; `e[i]` couples `d[i]`
/// and `d[i+1]`. On return `d` holds the eigenvalues (unsorted).
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> bool {
    let n = d.len();
    if n == 0 {
        return true;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > TRIDIAG_MAX_ITERS {
                return false;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    true
}

/// Largest eigenvalue of a Hermitian matrix with a unit eigenvector.
///
/// Cheaper than [`hermitian_eigen`] for repeated calls: tridiagonal
/// reduction, eigenvalues by implicit QL, then inverse iteration on the
/// tridiagonal form and back-transformation.
pub fn hermitian_max_eigenpair(m: &ComplexMatrix) -> Result<(f64, ComplexVector), DenseError> {
    let n = check_hermitian(m)?;
    if n == 0 {
        return Err(DenseError::DimensionMismatch { expected: 1, found: 0 });
    }
    // Only the lower triangle of `a` (row-major) is kept up to date.
    let h = m.hermitian_part();
    let mut a: Vec<Complex64> = h.as_slice().to_vec();
    let mut reflectors: Vec<(usize, ComplexVector, f64)> = Vec::new();
    let mut p = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let off = k + 1;
        let len = n - off;
        let x: ComplexVector = (off..n).map(|i| a[i * n + k]).collect();
        if x[1..].iter().all(|z| *z == ZERO) {
            continue;
        }
        let Some((v, tau, _)) = householder(&x) else {
            continue;
        };
        // p = τ A v on the trailing block, from the lower triangle.
        let p = &mut p[..len];
        p.iter_mut().for_each(|z| *z = ZERO);
        for i in 0..len {
            let row = &a[(off + i) * n + off..(off + i) * n + off + i];
            let vi = v[i];
            let mut s = a[(off + i) * n + off + i] * vi;
            for ((aij, vj), pj) in row.iter().zip(&v[..i]).zip(p[..i].iter_mut()) {
                s += aij * vj;
                *pj += aij.conj() * vi;
            }
            p[i] += s;
        }
        p.iter_mut().for_each(|z| *z *= tau);
        let vp: Complex64 = v.iter().zip(p.iter()).map(|(vi, pi)| vi.conj() * pi).sum();
        let kk = 0.5 * tau * vp.re;
        let q: ComplexVector = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk).collect();
        for i in 0..len {
            let (vi, qi) = (v[i], q[i]);
            let row = &mut a[(off + i) * n + off..(off + i) * n + off + i + 1];
            for ((aij, vj), qj) in row.iter_mut().zip(&v[..=i]).zip(&q[..=i]) {
                *aij -= vi * qj.conj() + qi * vj.conj();
            }
        }
        // column k below the diagonal: H x = α e₁
        let hx: Complex64 = v.iter().zip(&x).map(|(vi, xi)| vi.conj() * xi).sum::<Complex64>() * tau;
        for i in 0..len {
            a[(off + i) * n + k] = x[i] - v[i] * hx;
        }
        reflectors.push((off, v, tau));
    }
    // Phase scaling to a real symmetric tridiagonal matrix.
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e = vec![0.0; n];
    for k in 0..n - 1 {
        let sub = a[(k + 1) * n + k];
        let r = sub.norm();
        e[k] = r;
        phases[k + 1] = if r == 0.0 { phases[k] } else { phases[k] * sub / r };
    }
    let d0 = d.clone();
    let e0 = e.clone();
    if !tridiagonal_ql(&mut d, &mut e) {
        return Err(DenseError::NoConvergence {
            partial: Box::new(EigenResult {
                eigenvalues: Vec::new(),
                eigenvectors: None,
            }),
            dim: n,
        });
    }
    let lambda = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y = tridiagonal_inverse_iteration(&d0, &e0, lambda);
    let mut x: ComplexVector = y.iter().zip(&phases).map(|(&yi, &ph)| ph * yi).collect();
    for (off, v, tau) in reflectors.iter().rev() {
        let s: Complex64 = v.iter().zip(&x[*off..]).map(|(vi, xi)| vi.conj() * xi).sum::<Complex64>() * *tau;
        for (xi, vi) in x[*off..].iter_mut().zip(v) {
            *xi -= vi * s;
        }
    }
    let nx = norm2(&x);
    for xi in x.iter_mut() {
        *xi /= nx;
    }
    Ok((lambda, x))
}

/// Eigenvector of a real symmetric tridiagonal matrix for an eigenvalue
/// estimate, by shifted inverse iteration with partial pivoting.
fn tridiagonal_inverse_iteration(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![1.0];
    }
    let scale = d.iter().chain(e.iter()).map(|x| x.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let shift = lambda + 4.0 * f64::EPSILON * scale;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919 % 13) as f64) / 13.0).collect();
    for _ in 0..3 {
        x = solve_shifted_tridiagonal(d, e, shift, &x, scale);
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in x.iter_mut() {
            *v /= nx;
        }
    }
    x
}

/// Solves `(T − σI)y = b` for symmetric tridiagonal `T` using Gaussian
/// elimination with partial pivoting; tiny pivots are perturbed.
fn solve_shifted_tridiagonal(d: &[f64], e: &[f64], sigma: f64, b: &[f64], scale: f64) -> Vec<f64> {
    let n = d.len();
    let tiny = f64::EPSILON * scale;
    // Band storage of U after pivoting: main, first and second superdiagonals.
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    let mut diag = d[0] - sigma;
    let mut sup = if n > 1 { e[0] } else { 0.0 };
    let mut sup2 = 0.0;
    for k in 0..n - 1 {
        let sub = e[k];
        let next_diag = d[k + 1] - sigma;
        let next_sup = if k + 2 < n { e[k + 1] } else { 0.0 };
        if diag.abs() >= sub.abs() {
            let piv = if diag.abs() < tiny { tiny } else { diag };
            let l = sub / piv;
            u0[k] = piv;
            u1[k] = sup;
            u2[k] = sup2;
            rhs[k + 1] -= l * rhs[k];
            diag = next_diag - l * sup;
            sup = next_sup - l * sup2;
            sup2 = 0.0;
        } else {
            let l = diag / sub;
            u0[k] = sub;
            u1[k] = next_diag;
            u2[k] = next_sup;
            rhs.swap(k, k + 1);
            rhs[k + 1] -= l * rhs[k];
            diag = sup - l * next_diag;
            sup = sup2 - l * next_sup;
            sup2 = 0.0;
        }
    }
    u0[n - 1] = if diag.abs() < tiny { tiny } else { diag };
    let mut y = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        if k + 1 < n {
            s -= u1[k] * y[k + 1];
        }
        if k + 2 < n {
            s -= u2[k] * y[k + 2];
        }
        y[k] = s / u0[k];
    }
    y
}

/// Reduces a square matrix to upper Hessenberg form by Householder similarity.
fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let x: ComplexVector = (k + 1..n).map(|i| h[(i, k)]).collect();
        if x[1..].iter().all(|z| *z == ZERO) {
            continue;
        }
        let Some((v, tau, _)) = householder(&x) else {
            continue;
        };
        let off = k + 1;
        // left: rows off.., all columns from k
        for j in k..n {
            let s: Complex64 = (0..v.len()).map(|i| v[i].conj() * h[(off + i, j)]).sum::<Complex64>() * tau;
            for i in 0..v.len() {
                let upd = v[i] * s;
                h[(off + i, j)] -= upd;
            }
        }
        // right: columns off.., all rows
        for i in 0..n {
            let s: Complex64 = (0..v.len()).map(|j| h[(i, off + j)] * v[j]).sum::<Complex64>() * tau;
            for j in 0..v.len() {
                let upd = s * v[j].conj();
                h[(i, off + j)] -= upd;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Complex Givens rotation `[[c, s], [−s̄, c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let rho = na.hypot(nb);
    (na / rho, (a / na) * b.conj() / rho)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5) * ((a - d) * 0.5) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues of a general square matrix, sorted by descending modulus.
///
/// Hessenberg reduction followed by explicitly shifted complex QR with
/// Wilkinson shifts and deflation. On exhaustion of the iteration cap the
/// eigenvalues found so far are returned inside the error.
pub fn general_eigen(m: &ComplexMatrix) -> Result<EigenResult, DenseError> {
    let n = m.require_square()?;
    if n > MAX_DIM {
        return Err(DenseError::TooLarge(n));
    }
    let mut h = hessenberg(m);
    let norm = h.norm_fro();
    let mut eig: Vec<Complex64> = Vec::with_capacity(n);
    if n == 0 {
        return Ok(EigenResult {
            eigenvalues: eig,
            eigenvectors: None,
        });
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            eig.push(h[(0, 0)]);
            break;
        }
        let mut l = hi;
        while l > 0 {
            let mut tst = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if tst == 0.0 {
                tst = norm;
            }
            if h[(l, l - 1)].norm() <= f64::EPSILON * tst {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > QR_ITERS_PER_EIGENVALUE {
            let mut partial = eig.clone();
            partial.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
            return Err(DenseError::NoConvergence {
                partial: Box::new(EigenResult {
                    eigenvalues: partial,
                    eigenvectors: None,
                }),
                dim: n,
            });
        }
        let mu = if iter % 11 == 10 {
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            let top = (k + 2).min(hi);
            for i in l..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(EigenResult {
        eigenvalues: eig,
        eigenvectors: None,
    })
}

/// `σ_min(m − λI)/‖m‖₂` for each eigenvalue; small values certify that each
/// reported λ is an eigenvalue of a nearby matrix.
pub fn eigen_residuals(m: &ComplexMatrix, eigenvalues: &[Complex64]) -> Result<Vec<f64>, DenseError> {
    let n = m.require_square()?;
    let norm = singular_values(m).first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    Ok(eigenvalues
        .iter()
        .map(|&lambda| {
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] -= lambda;
            }
            singular_values(&shifted).last().copied().unwrap_or(0.0) / norm
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn real(rows: usize, data: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real(rows, data.len() / rows, data).unwrap()
    }

    #[test]
    fn hermitian_diag() {
        let r = hermitian_eigen(&real(2, &[1.0, 0.0, 0.0, 4.0])).unwrap();
        assert_eq!(r.real_values(), vec![4.0, 1.0]);
    }

    #[test]
    fn hermitian_two_by_two() {
        let r = hermitian_eigen(&real(2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert_abs_diff_eq!(r.eigenvalues[0].re, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.eigenvalues[1].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_rejects_non_hermitian() {
        assert!(matches!(
            hermitian_eigen(&real(2, &[1.0, 2.0, 0.0, 1.0])),
            Err(DenseError::NonHermitian { .. })
        ));
    }

    #[test]
    fn hermitian_complex_reconstructs() {
        let i = Complex64::new(0.0, 1.0);
        let m = ComplexMatrix::new(
            3,
            3,
            vec![
                Complex64::new(2.0, 0.0),
                1.0 + i,
                -i,
                1.0 - i,
                Complex64::new(3.0, 0.0),
                Complex64::new(0.5, 0.0),
                i,
                Complex64::new(0.5, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        )
        .unwrap();
        let r = hermitian_eigen(&m).unwrap();
        let v = r.eigenvectors.as_ref().unwrap();
        let d = ComplexMatrix::from_diag(&r.eigenvalues);
        let rec = v.matmul(&d).matmul(&v.adjoint());
        assert!(rec.sub(&m).max_abs() < 1e-12);
        let (lmax, x) = hermitian_max_eigenpair(&m).unwrap();
        assert_abs_diff_eq!(lmax, r.eigenvalues[0].re, epsilon = 1e-12);
        let mx = m.matvec(&x);
        let res: f64 = mx.iter().zip(&x).map(|(a, b)| (a - b * lmax).norm_sqr()).sum::<f64>().sqrt();
        assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn general_diagonal() {
        let i = Complex64::new(0.0, 1.0);
        let m = ComplexMatrix::from_diag(&[Complex64::new(2.0, 0.0), i]);
        let r = general_eigen(&m).unwrap();
        assert_abs_diff_eq!((r.eigenvalues[0] - 2.0).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((r.eigenvalues[1] - i).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn general_nilpotent() {
        let r = general_eigen(&real(2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!(r.eigenvalues.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn general_companion() {
        let r = general_eigen(&real(2, &[3.0, -2.0, 1.0, 0.0])).unwrap();
        assert_abs_diff_eq!((r.eigenvalues[0] - 2.0).norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!((r.eigenvalues[1] - 1.0).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn general_rotation_has_imaginary_pair() {
        let r = general_eigen(&real(2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        let mut ims: Vec<f64> = r.eigenvalues.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ims[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ims[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tridiagonal_ql_matches_known_spectrum() {
        // second-difference matrix: 2 − 2cos(kπ/(n+1))
        let n = 8;
        let mut d = vec![2.0; n];
        let mut e = vec![-1.0; n];
        assert!(tridiagonal_ql(&mut d, &mut e));
        d.sort_by(f64::total_cmp);
        for (k, lam) in d.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_abs_diff_eq!(*lam, exact, epsilon = 1e-13);
        }
    }
}
