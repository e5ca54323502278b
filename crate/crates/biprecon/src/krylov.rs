//! GMRES (Euclidean, weighted, restarted) and preconditioned CG with full
//! history capture.
//!
//! Every solve starts from `x₀ = 0`. Iterates are stored so that residuals
//! can be recomputed in any norm after the fact; the recorded norms are
//! true residuals, never the Givens recurrence estimate.

use crate::config::{BREAKDOWN_TOL, CROSS_NORM_TOL, HERMITIAN_TOL, REORTH_TOL};
use crate::densela::{axpy, dot, ComplexMatrix, ComplexVector, DenseError, LuFactors};
use crate::opprec::{OpPrecError, PreconditionedSystem};
use crate::spaces::DiscreteSpace;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum KrylovError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("Arnoldi breakdown at step {step} before convergence")]
    Breakdown { step: usize },
    #[error("operator not Hermitian positive definite (curvature {curvature:e} at step {step})")]
    NotHpd { step: usize, curvature: f64 },
    #[error("right-hand side is zero")]
    ZeroRightHandSide,
    #[error("mismatched runs: {0}")]
    MismatchedRuns(String),
    #[error(transparent)]
    OpPrec(#[from] OpPrecError),
    #[error(transparent)]
    Dense(#[from] DenseError),
}

/// A square linear map applied to vectors.
pub trait Operator {
    fn dim(&self) -> usize;
    fn apply(&self, u: &[Complex64]) -> Result<ComplexVector, KrylovError>;
}

impl Operator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, u: &[Complex64]) -> Result<ComplexVector, KrylovError> {
        Ok(self.matvec(u))
    }
}

impl Operator for PreconditionedSystem {
    fn dim(&self) -> usize {
        PreconditionedSystem::dim(self)
    }

    fn apply(&self, u: &[Complex64]) -> Result<ComplexVector, KrylovError> {
        Ok(PreconditionedSystem::apply(self, u)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    Gmres,
    WeightedGmres,
    Cg,
}

impl std::str::FromStr for Method {
    type Err = KrylovError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gmres" => Ok(Self::Gmres),
            "weightedGmres" | "weighted-gmres" | "weighted" => Ok(Self::WeightedGmres),
            "cg" => Ok(Self::Cg),
            other => Err(KrylovError::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub method: Method,
    /// Restart length; `None` runs full GMRES.
    pub restart: Option<usize>,
    /// Relative residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Gram of the weighted inner product. Weighted GMRES falls back to
    /// the X-Gram of the system when unset.
    pub weight: Option<Arc<DiscreteSpace>>,
}

impl SolveConfig {
    pub fn new(method: Method, tol: f64, max_iter: usize) -> Self {
        Self {
            method,
            restart: None,
            tol,
            max_iter,
            weight: None,
        }
    }

    pub fn with_restart(mut self, m: usize) -> Self {
        self.restart = Some(m);
        self
    }

    pub fn with_weight(mut self, gram: Arc<DiscreteSpace>) -> Self {
        self.weight = Some(gram);
        self
    }

    /// Checks the tolerance, iteration cap and restart length against `n`.
    pub fn validate(&self, n: usize) -> Result<(), KrylovError> {
        if !(self.tol > 0.0) {
            return Err(KrylovError::InvalidConfig("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(KrylovError::InvalidConfig("max_iter must be at least 1".into()));
        }
        if let Some(m) = self.restart {
            if m == 0 || m > n {
                return Err(KrylovError::InvalidConfig(format!("restart {m} outside [1, {n}]")));
            }
        }
        if let Some(w) = &self.weight {
            if w.dim() != n {
                return Err(KrylovError::InvalidConfig(format!("weight has dimension {} but system {n}", w.dim())));
            }
        }
        Ok(())
    }
}

/// Residual norms `‖P r_k‖` and rates `Θ_k = (‖P r_k‖/‖P r₀‖)^{1/k}`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualHistory {
    pub norms: Vec<f64>,
    /// `rates[0]` is 1 by convention.
    pub rates: Vec<f64>,
    #[serde(skip)]
    pub iterates: Vec<ComplexVector>,
    pub converged: bool,
    pub iterations: usize,
    pub restart: Option<usize>,
    pub weighted: bool,
}

fn rates_of(norms: &[f64]) -> Vec<f64> {
    let r0 = norms[0];
    norms
        .iter()
        .enumerate()
        .map(|(k, &r)| if k == 0 { 1.0 } else { (r / r0).powf(1.0 / k as f64) })
        .collect()
}

impl ResidualHistory {
    /// Relative residual `‖P r_k‖/‖P r₀‖`.
    pub fn relative(&self, k: usize) -> f64 {
        self.norms[k] / self.norms[0]
    }

    /// CSV with columns `k,norm,rate,bound`; the bound column is empty
    /// where none is given.
    pub fn to_csv(&self, bound: Option<&[f64]>) -> String {
        let mut s = String::from("k,norm,rate,bound\n");
        for k in 0..self.norms.len() {
            let b = bound
                .and_then(|b| b.get(k))
                .map(|v| format!("{v:.16e}"))
                .unwrap_or_default();
            let _ = writeln!(s, "{k},{:.16e},{:.16e},{b}", self.norms[k], self.rates[k]);
        }
        s
    }
}

/// A-norm errors of CG and rates `Θ_k^CG = (‖e_k‖_A/‖e₀‖_A)^{1/k}`.
#[derive(Debug, Clone, Serialize)]
pub struct CgErrorHistory {
    pub a_norm_errors: Vec<f64>,
    pub rates: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl CgErrorHistory {
    pub fn to_csv(&self, bound: Option<&[f64]>) -> String {
        let mut s = String::from("k,a_norm_error,rate,bound\n");
        for k in 0..self.a_norm_errors.len() {
            let b = bound
                .and_then(|b| b.get(k))
                .map(|v| format!("{v:.16e}"))
                .unwrap_or_default();
            let _ = writeln!(s, "{k},{:.16e},{:.16e},{b}", self.a_norm_errors[k], self.rates[k]);
        }
        s
    }
}

/// `(u, v)_H = vᴴHu`; Euclidean when `gram` is `None`.
fn inner(gram: Option<&ComplexMatrix>, u: &[Complex64], v: &[Complex64]) -> Complex64 {
    match gram {
        Some(h) => dot(v, &h.matvec(u)),
        None => dot(v, u),
    }
}

fn norm_in(gram: Option<&ComplexMatrix>, u: &[Complex64]) -> f64 {
    inner(gram, u, u).re.max(0.0).sqrt()
}

fn residual<O: Operator + ?Sized>(op: &O, f: &[Complex64], x: &[Complex64]) -> Result<ComplexVector, KrylovError> {
    let qx = op.apply(x)?;
    Ok(f.iter().zip(&qx).map(|(a, b)| a - b).collect())
}

/// Solves the `k × k` upper-triangular system stored column-wise in `r`.
fn back_substitute(r: &[ComplexVector], g: &[Complex64], k: usize) -> ComplexVector {
    let mut y = vec![Complex64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= r[j][i] * y[j];
        }
        y[i] = s / r[i][i];
    }
    y
}

/// GMRES on `Q x = f` with the inner product of `gram` (Euclidean when
/// `None`). Arnoldi runs in that inner product directly.
pub fn gmres<O: Operator + ?Sized>(
    op: &O,
    f: &[Complex64],
    gram: Option<&ComplexMatrix>,
    restart: Option<usize>,
    tol: f64,
    max_iter: usize,
) -> Result<(ComplexVector, ResidualHistory), KrylovError> {
    let n = op.dim();
    if f.len() != n {
        return Err(DenseError::DimensionMismatch { expected: n, found: f.len() }.into());
    }
    let mut cfg = SolveConfig::new(Method::Gmres, tol, max_iter);
    cfg.restart = restart;
    cfg.validate(n)?;
    let m = restart.unwrap_or(n).min(n);
    let zero = Complex64::new(0.0, 0.0);

    let mut x = vec![zero; n];
    let mut r = f.to_vec();
    let r0 = norm_in(gram, &r);
    if r0 == 0.0 {
        return Err(KrylovError::ZeroRightHandSide);
    }
    let mut norms = vec![r0];
    let mut iterates = vec![x.clone()];
    let mut converged = false;
    let mut total = 0;

    'outer: while total < max_iter {
        let beta = norm_in(gram, &r);
        let mut basis: Vec<ComplexVector> = vec![r.iter().map(|v| v / beta).collect()];
        // Columns of the rotated Hessenberg matrix (upper triangular part).
        let mut cols: Vec<ComplexVector> = Vec::with_capacity(m);
        let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![Complex64::new(beta, 0.0)];
        let x_start = x.clone();

        for j in 0..m {
            let mut w = op.apply(&basis[j])?;
            let mut h = vec![zero; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = inner(gram, &w, v);
                axpy(-hij, v, &mut w);
                h[i] += hij;
            }
            let mut wn = norm_in(gram, &w);
            let loss = basis
                .iter()
                .map(|v| inner(gram, &w, v).norm())
                .fold(0.0, f64::max);
            if wn > 0.0 && loss > REORTH_TOL * wn {
                for (i, v) in basis.iter().enumerate() {
                    let hij = inner(gram, &w, v);
                    axpy(-hij, v, &mut w);
                    h[i] += hij;
                }
                wn = norm_in(gram, &w);
            }
            h[j + 1] = Complex64::new(wn, 0.0);
            let col_scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let breakdown = wn <= BREAKDOWN_TOL * col_scale;

            for (i, &(c, s)) in rotations.iter().enumerate() {
                let a = h[i];
                let b = h[i + 1];
                h[i] = c * a + s * b;
                h[i + 1] = -s.conj() * a + c * b;
            }
            let (a, b) = (h[j], h[j + 1]);
            let rho = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if a.norm() == 0.0 {
                (0.0, b.conj() / b.norm())
            } else {
                (a.norm() / rho, (a / a.norm()) * b.conj() / rho)
            };
            h[j] = c * a + s * b;
            h[j + 1] = zero;
            rotations.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            cols.push(h);

            let y = back_substitute(&cols, &g, j + 1);
            x = x_start.clone();
            for (yi, v) in y.iter().zip(&basis) {
                axpy(*yi, v, &mut x);
            }
            r = residual(op, f, &x)?;
            let rk = norm_in(gram, &r);
            norms.push(rk);
            iterates.push(x.clone());
            total += 1;

            if rk <= tol * r0 || breakdown {
                converged = rk <= tol * r0 || breakdown;
                break 'outer;
            }
            if total >= max_iter {
                break 'outer;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
    }

    let rates = rates_of(&norms);
    Ok((
        x,
        ResidualHistory {
            norms,
            rates,
            iterates,
            converged,
            iterations: total,
            restart,
            weighted: gram.is_some(),
        },
    ))
}

fn weight_gram<'a>(sys: &'a PreconditionedSystem, cfg: &'a SolveConfig) -> Option<&'a ComplexMatrix> {
    match cfg.method {
        Method::Gmres => None,
        _ => Some(cfg.weight.as_ref().map(|w| w.gram()).unwrap_or_else(|| sys.x_space().gram())),
    }
}

/// GMRES on `P_μA_ν x = P_μb_ν`, Euclidean or weighted per `cfg.method`.
pub fn gmres_solve(sys: &PreconditionedSystem, cfg: &SolveConfig) -> Result<(ComplexVector, ResidualHistory), KrylovError> {
    if cfg.method == Method::Cg {
        return Err(KrylovError::InvalidConfig("gmres_solve called with method cg".into()));
    }
    cfg.validate(sys.dim())?;
    let f = sys.preconditioned_rhs()?;
    gmres(sys, &f, weight_gram(sys, cfg), cfg.restart, cfg.tol, cfg.max_iter)
}

/// Preconditioned CG for Hermitian positive definite `a` with Hermitian
/// positive definite preconditioner action `p`. Errors are measured in the
/// `a`-norm against a direct solve.
pub fn cg<F>(a: &ComplexMatrix, p: F, b: &[Complex64], tol: f64, max_iter: usize) -> Result<(ComplexVector, CgErrorHistory), KrylovError>
where
    F: Fn(&[Complex64]) -> Result<ComplexVector, KrylovError>,
{
    let n = a.rows();
    if b.len() != n {
        return Err(DenseError::DimensionMismatch { expected: n, found: b.len() }.into());
    }
    SolveConfig::new(Method::Cg, tol, max_iter).validate(n)?;
    let dev = a.hermitian_deviation();
    if dev > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(KrylovError::NotHpd { step: 0, curvature: -dev });
    }
    let exact = LuFactors::new(a)?.solve(b)?;
    let a_err = |x: &[Complex64]| -> f64 {
        let e: ComplexVector = exact.iter().zip(x).map(|(u, v)| u - v).collect();
        dot(&e, &a.matvec(&e)).re.max(0.0).sqrt()
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let mut r = b.to_vec();
    let r0 = crate::densela::norm2(&r);
    if r0 == 0.0 {
        return Err(KrylovError::ZeroRightHandSide);
    }
    let mut z = p(&r)?;
    let mut d = z.clone();
    let mut rz = dot(&r, &z).re;
    let mut errors = vec![a_err(&x)];
    let mut res = vec![r0];
    let mut converged = false;
    let mut k = 0;
    while k < max_iter {
        let ad = a.matvec(&d);
        let curv = dot(&d, &ad).re;
        if !(curv > 0.0) {
            return Err(KrylovError::NotHpd { step: k, curvature: curv });
        }
        let alpha = rz / curv;
        axpy(Complex64::new(alpha, 0.0), &d, &mut x);
        axpy(Complex64::new(-alpha, 0.0), &ad, &mut r);
        k += 1;
        errors.push(a_err(&x));
        let rn = crate::densela::norm2(&r);
        res.push(rn);
        if rn <= tol * r0 {
            converged = true;
            break;
        }
        z = p(&r)?;
        let rz_new = dot(&r, &z).re;
        if !(rz_new > 0.0) {
            return Err(KrylovError::NotHpd { step: k, curvature: rz_new });
        }
        let beta = rz_new / rz;
        rz = rz_new;
        d = z.iter().zip(&d).map(|(zi, di)| zi + beta * di).collect();
    }
    let rates = rates_of(&errors);
    Ok((
        x,
        CgErrorHistory {
            a_norm_errors: errors,
            rates,
            residual_norms: res,
            converged,
            iterations: k,
        },
    ))
}

/// CG on `A_ν u = b_ν` preconditioned by `P_μ`.
pub fn cg_solve(sys: &PreconditionedSystem, cfg: &SolveConfig) -> Result<(ComplexVector, CgErrorHistory), KrylovError> {
    cg(sys.problem.op.matrix(), |r| Ok(sys.apply_p(r)?), &sys.problem.rhs, cfg.tol, cfg.max_iter)
}

/// Per-iteration cross norms of a Euclidean and a weighted run.
#[derive(Debug, Clone, Serialize)]
pub struct CrossNormReport {
    /// `‖P r_k‖₂` of the Euclidean run.
    pub euclid_2: Vec<f64>,
    /// `‖P r̃_k‖₂` of the weighted run.
    pub weighted_2: Vec<f64>,
    /// `‖P r_k‖_H` of the Euclidean run.
    pub euclid_h: Vec<f64>,
    /// `‖P r̃_k‖_H` of the weighted run.
    pub weighted_h: Vec<f64>,
    /// Iterations compared.
    pub compared: usize,
    pub holds: bool,
    /// Largest excess over the allowed slack (negative when holding).
    pub worst_excess: f64,
}

/// Checks the minimal-residual cross inequalities `‖P r_k‖₂ ≤ ‖P r̃_k‖₂`
/// and `‖P r̃_k‖_H ≤ ‖P r_k‖_H`, recomputing both norms from the stored
/// iterates. Restarted runs are compared within their first cycle only,
/// where both iterates minimize over the same Krylov space.
pub fn residual_cross_check<O: Operator + ?Sized>(
    op: &O,
    f: &[Complex64],
    euclid: &ResidualHistory,
    weighted: &ResidualHistory,
    gram: &ComplexMatrix,
) -> Result<CrossNormReport, KrylovError> {
    if euclid.weighted || !weighted.weighted {
        return Err(KrylovError::MismatchedRuns("expected one Euclidean and one weighted run".into()));
    }
    let n = op.dim();
    if euclid.iterates.first().map(|x| x.len()) != Some(n) || weighted.iterates.first().map(|x| x.len()) != Some(n) {
        return Err(KrylovError::MismatchedRuns("iterates missing or of wrong dimension".into()));
    }
    if euclid.iterates[0] != weighted.iterates[0] {
        return Err(KrylovError::MismatchedRuns("different starting vectors".into()));
    }
    let cycle = euclid.restart.unwrap_or(usize::MAX).min(weighted.restart.unwrap_or(usize::MAX));
    let compared = (euclid.iterates.len().min(weighted.iterates.len()) - 1).min(cycle);
    let mut rep = CrossNormReport {
        euclid_2: vec![],
        weighted_2: vec![],
        euclid_h: vec![],
        weighted_h: vec![],
        compared,
        holds: true,
        worst_excess: f64::NEG_INFINITY,
    };
    let g = Some(gram);
    let r_e0 = residual(op, f, &euclid.iterates[0])?;
    let slack_2 = CROSS_NORM_TOL * norm_in(None, &r_e0);
    let slack_h = CROSS_NORM_TOL * norm_in(g, &r_e0);
    for k in 0..=compared {
        let re = residual(op, f, &euclid.iterates[k])?;
        let rw = residual(op, f, &weighted.iterates[k])?;
        let (e2, w2, eh, wh) = (norm_in(None, &re), norm_in(None, &rw), norm_in(g, &re), norm_in(g, &rw));
        let excess = (e2 - w2 - slack_2).max(wh - eh - slack_h);
        rep.worst_excess = rep.worst_excess.max(excess);
        if excess > 0.0 {
            rep.holds = false;
        }
        rep.euclid_2.push(e2);
        rep.weighted_2.push(w2);
        rep.euclid_h.push(eh);
        rep.weighted_h.push(wh);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_converges_in_one_step() {
        let q = ComplexMatrix::identity(4);
        let f = vec![c(1.0), c(-2.0), Complex64::new(0.0, 3.0), c(0.5)];
        let (x, h) = gmres(&q, &f, None, None, 1e-12, 10).unwrap();
        assert!(h.converged);
        assert_eq!(h.iterations, 1);
        assert!(h.norms[1] < 1e-14);
        assert_eq!(x, f);
    }

    #[test]
    fn diag_one_two_exact_at_two() {
        // Brute force: min over x = a f + b Q f of ‖f - Q x‖ for k = 1 is
        // attained at a = 3/5, leaving residual (2/5, -1/5).
        let q = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let f = vec![c(1.0), c(1.0)];
        let (x, h) = gmres(&q, &f, None, None, 1e-14, 5).unwrap();
        assert_abs_diff_eq!(h.norms[1], (0.2f64).sqrt(), epsilon = 1e-14);
        assert_eq!(h.iterations, 2);
        assert!(h.norms[2] < 1e-14);
        assert_abs_diff_eq!((x[1] - c(0.5)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn weighted_identity_gram_matches_euclidean() {
        let q = ComplexMatrix::from_fn(5, 5, |i, j| Complex64::new(if i == j { 3.0 } else { 0.0 }, (i as f64 - j as f64) * 0.3));
        let f: Vec<Complex64> = (0..5).map(|i| Complex64::new(1.0, i as f64)).collect();
        let id = ComplexMatrix::identity(5);
        let (_, e) = gmres(&q, &f, None, None, 1e-13, 5).unwrap();
        let (_, w) = gmres(&q, &f, Some(&id), None, 1e-13, 5).unwrap();
        for (a, b) in e.norms.iter().zip(&w.norms) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn cg_finite_termination() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 2.0, 3.0]);
        let b = vec![c(1.0); 3];
        let (x, h) = cg(&a, |r| Ok(r.to_vec()), &b, 1e-14, 10).unwrap();
        assert_eq!(h.iterations, 3);
        assert!(h.a_norm_errors[3] < 1e-14);
        assert_abs_diff_eq!((x[2] - c(1.0 / 3.0)).norm(), 0.0, epsilon = 1e-14);
        let (_, h1) = cg(&ComplexMatrix::identity(3), |r| Ok(r.to_vec()), &b, 1e-14, 10).unwrap();
        assert_eq!(h1.iterations, 1);
    }

    #[test]
    fn cg_rejects_indefinite() {
        let a = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let b = vec![c(1.0), c(1.0)];
        assert!(matches!(cg(&a, |r| Ok(r.to_vec()), &b, 1e-12, 5), Err(KrylovError::NotHpd { .. })));
    }

    #[test]
    fn cross_check_identity_gram_is_equality() {
        let q = ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 }, 0.0));
        let f = vec![c(1.0); 4];
        let id = ComplexMatrix::identity(4);
        let (_, e) = gmres(&q, &f, None, None, 1e-13, 4).unwrap();
        let (_, w) = gmres(&q, &f, Some(&id), None, 1e-13, 4).unwrap();
        let rep = residual_cross_check(&q, &f, &e, &w, &id).unwrap();
        assert!(rep.holds);
        for k in 0..=rep.compared {
            assert_abs_diff_eq!(rep.euclid_2[k], rep.weighted_2[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let q = ComplexMatrix::identity(3);
        let f = vec![c(1.0); 3];
        assert!(matches!(gmres(&q, &f, None, Some(4), 1e-10, 3), Err(KrylovError::InvalidConfig(_))));
        assert!(matches!(gmres(&q, &f, None, None, 0.0, 3), Err(KrylovError::InvalidConfig(_))));
        assert!(matches!(gmres(&q, &[c(0.0); 3], None, None, 1e-10, 3), Err(KrylovError::ZeroRightHandSide)));
    }
}
