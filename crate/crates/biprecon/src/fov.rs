//! Field of values in a Gram geometry, coercivity measurement and Carleman
//! class diagnostics.
//!
//! The H-field of values of `Q` equals the Euclidean one of
//! `Q̂ = H^{1/2}QH^{-1/2}`. Its boundary is traced with Johnson's support
//! function method: for each angle θ the largest eigenvalue of the
//! Hermitian part of `e^{-iθ}Q̂` is the support value `h(θ)` and its
//! eigenvector `x` yields the boundary point `xᴴQ̂x`.

use crate::config::{
    CONVEXITY_TOL, FOV_REFINE_MAX_ITERS, FOV_REFINE_TOL, FOV_SAMPLES, H_NORMAL_TOL,
};
use crate::densela::{
    dot, hermitian_max_eigenpair, norm_2, singular_values, ComplexMatrix, DenseError, LuFactors,
};
use crate::spaces::{DiscreteSpace, SpaceError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum FovError {
    #[error("at least 16 angle samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("carleman index must be non-negative, got {0}")]
    InvalidIndex(f64),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Sampled support function and boundary of a field of values.
#[derive(Debug, Clone, Serialize)]
pub struct FovSample {
    pub angles: Vec<f64>,
    pub support_values: Vec<f64>,
    pub boundary_points: Vec<Complex64>,
    /// Distance of the field of values from the origin.
    pub v_h: f64,
    pub contains_zero: bool,
    /// Angle θ maximizing `−h(θ)` after refinement.
    pub nearest_angle: f64,
}

impl FovSample {
    /// True when consecutive boundary points turn counter-clockwise within
    /// `tol` (relative to the squared diameter).
    pub fn is_convex(&self, tol: f64) -> bool {
        let pts = &self.boundary_points;
        let n = pts.len();
        let scale = pts.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        (0..n).all(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let c = pts[(i + 2) % n];
            cross(b - a, c - b) >= -tol * scale * scale
        })
    }

    /// Whether `z` satisfies every sampled support inequality
    /// `Re(e^{-iθ}z) ≤ h(θ) + dilation`.
    pub fn support_contains(&self, z: Complex64, dilation: f64) -> bool {
        self.angles
            .iter()
            .zip(&self.support_values)
            .all(|(&t, &h)| (Complex64::from_polar(1.0, -t) * z).re <= h + dilation)
    }

    /// Distance from `z` to the convex hull of the boundary points.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        hull_distance(&convex_hull(&self.boundary_points), z)
    }

    /// CSV rows `theta,support,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,support,re,im\n");
        for i in 0..self.angles.len() {
            let z = self.boundary_points[i];
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.angles[i], self.support_values[i], z.re, z.im
            );
        }
        out
    }
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Convex hull (counter-clockwise, no repeated points) by monotone chain.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 2]) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 2]) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

/// Distance from `z` to a convex polygon given counter-clockwise; zero inside.
pub fn hull_distance(hull: &[Complex64], z: Complex64) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => (z - hull[0]).norm(),
        2 => segment_distance(hull[0], hull[1], z),
        n => {
            let inside = (0..n).all(|i| cross(hull[(i + 1) % n] - hull[i], z - hull[i]) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n).map(|i| segment_distance(hull[i], hull[(i + 1) % n], z)).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// `H^{1/2}·Q·H^{-1/2}` with Hermitian square roots of the Gram.
pub fn transformed(q: &ComplexMatrix, gram: &ComplexMatrix) -> Result<ComplexMatrix, FovError> {
    let sp = DiscreteSpace::new("H", gram.clone())?;
    Ok(sp.sqrt_gram().matmul(q).matmul(sp.inv_sqrt_gram()))
}

/// Support value `h(θ)` and boundary point of the Euclidean field of values of `qh`.
fn support(qh: &ComplexMatrix, theta: f64) -> Result<(f64, Complex64), DenseError> {
    let n = qh.rows();
    let rot = Complex64::from_polar(1.0, -theta);
    let herm = ComplexMatrix::from_fn(n, n, |i, j| (rot * qh[(i, j)] + (rot * qh[(j, i)]).conj()) * 0.5);
    let (lambda, x) = hermitian_max_eigenpair(&herm)?;
    let z = dot(&x, &qh.matvec(&x));
    Ok((lambda, z))
}

/// Field of values of `q` in the geometry of `gram`, sampled at `samples`
/// uniform angles and refined around the angle closest to the origin.
pub fn field_of_values(q: &ComplexMatrix, gram: &ComplexMatrix, samples: usize) -> Result<FovSample, FovError> {
    if samples < 16 {
        return Err(FovError::TooFewSamples(samples));
    }
    q.require_square()?;
    let qh = transformed(q, gram)?;
    euclidean_fov(&qh, samples)
}

/// Field of values with the default number of samples.
pub fn field_of_values_default(q: &ComplexMatrix, gram: &ComplexMatrix) -> Result<FovSample, FovError> {
    field_of_values(q, gram, FOV_SAMPLES)
}

fn euclidean_fov(qh: &ComplexMatrix, samples: usize) -> Result<FovSample, FovError> {
    let angles: Vec<f64> = (0..samples).map(|j| 2.0 * PI * j as f64 / samples as f64).collect();
    let evals: Vec<(f64, Complex64)> = angles
        .par_iter()
        .map(|&t| support(qh, t))
        .collect::<Result<_, _>>()?;
    let support_values: Vec<f64> = evals.iter().map(|e| e.0).collect();
    let boundary_points: Vec<Complex64> = evals.iter().map(|e| e.1).collect();
    let (best, best_val) = support_values
        .iter()
        .enumerate()
        .map(|(j, h)| (j, -h))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    // Golden-section refinement of max −h(θ) on the neighbouring cells.
    let step = 2.0 * PI / samples as f64;
    let g = |t: f64| support(qh, t).map(|(h, _)| -h);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (angles[best] - step, angles[best] + step);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    let mut refined = best_val;
    let mut refined_angle = angles[best];
    for _ in 0..FOV_REFINE_MAX_ITERS {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - ratio * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + ratio * (b - a);
            gd = g(d)?;
        }
        let (cand_angle, cand) = if gc > gd { (c, gc) } else { (d, gd) };
        let previous = refined;
        if cand > refined {
            refined = cand;
            refined_angle = cand_angle;
        }
        if (refined - previous).abs() < FOV_REFINE_TOL && (b - a) < 1e-6 {
            break;
        }
    }
    let v_h = refined.max(0.0);
    Ok(FovSample {
        angles,
        support_values,
        boundary_points,
        v_h,
        contains_zero: v_h == 0.0,
        nearest_angle: refined_angle.rem_euclid(2.0 * PI),
    })
}

/// Coercivity and normality diagnostics of `Q` in the geometry of `gram`.
#[derive(Debug, Clone, Serialize)]
pub struct CoercivityReport {
    pub v_h: f64,
    /// Field of values lies in an open half-plane not containing 0.
    pub elliptic: bool,
    /// Angle φ such that `e^{iφ}·F_H(Q)` lies in the open right half-plane.
    pub rotation: f64,
    /// `min Re F_H(Q)`, positive when no rotation is needed.
    pub min_real_part: f64,
    pub h_normal: bool,
}

/// Distance to origin, ellipticity after optimal rotation and H-normality.
pub fn coercivity_check(q: &ComplexMatrix, gram: &ComplexMatrix) -> Result<CoercivityReport, FovError> {
    let fov = field_of_values_default(q, gram)?;
    let qh = transformed(q, gram)?;
    let (h_pi, _) = support(&qh, PI)?;
    let h_lu = LuFactors::new(gram)?;
    let q_star = h_lu.solve_matrix(&q.adjoint().matmul(gram))?;
    let comm = q.matmul(&q_star).sub(&q_star.matmul(q));
    let qn = norm_2(q);
    let h_normal = norm_2(&comm) <= H_NORMAL_TOL * qn * qn;
    Ok(CoercivityReport {
        v_h: fov.v_h,
        elliptic: fov.v_h > 0.0,
        rotation: (PI - fov.nearest_angle).rem_euclid(2.0 * PI),
        min_real_part: -h_pi,
        h_normal,
    })
}

/// Boundary convexity check with the configured tolerance.
pub fn boundary_is_convex(fov: &FovSample) -> bool {
    fov.is_convex(CONVEXITY_TOL)
}

/// Singular values and partial means of a compact part in H-geometry.
#[derive(Debug, Clone, Serialize)]
pub struct CarlemanDiagnostics {
    pub singular_values: Vec<f64>,
    /// `σ̄_k = (1/k)Σ_{j≤k}σ_j`, entry `k−1`.
    pub partial_means: Vec<f64>,
    pub p: f64,
    /// `(Σσ_j^p)^{1/p}`; the spectral norm when `p = 0`.
    pub carleman_norm: f64,
}

impl CarlemanDiagnostics {
    /// `σ̄_k` for `k ≥ 1`.
    pub fn partial_mean(&self, k: usize) -> f64 {
        if k == 0 {
            return f64::NAN;
        }
        let idx = (k - 1).min(self.partial_means.len() - 1);
        if k <= self.partial_means.len() {
            self.partial_means[idx]
        } else {
            // σ_j = 0 beyond the dimension
            self.partial_means[idx] * self.partial_means.len() as f64 / k as f64
        }
    }
}

/// Singular values of `H^{1/2}M⁻¹KH^{-1/2}` with partial means and the
/// Carleman `p`-norm.
pub fn carleman_diagnostics(
    compact_part: &ComplexMatrix,
    mass: &ComplexMatrix,
    gram: &ComplexMatrix,
    p: f64,
) -> Result<CarlemanDiagnostics, FovError> {
    if !(p >= 0.0) {
        return Err(FovError::InvalidIndex(p));
    }
    let minv_k = LuFactors::new(mass)?.solve_matrix(compact_part)?;
    let sv = singular_values(&transformed(&minv_k, gram)?);
    let mut partial_means = Vec::with_capacity(sv.len());
    let mut acc = 0.0;
    for (j, s) in sv.iter().enumerate() {
        acc += s;
        partial_means.push(acc / (j + 1) as f64);
    }
    let carleman_norm = if p == 0.0 {
        sv.first().copied().unwrap_or(0.0)
    } else {
        sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
    };
    Ok(CarlemanDiagnostics {
        singular_values: sv,
        partial_means,
        p,
        carleman_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn real(rows: usize, data: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real(rows, data.len() / rows, data).unwrap()
    }

    #[test]
    fn segment_for_diagonal() {
        let f = field_of_values(&ComplexMatrix::from_real_diag(&[1.0, 3.0]), &ComplexMatrix::identity(2), 64).unwrap();
        assert_abs_diff_eq!(f.v_h, 1.0, epsilon = 1e-12);
        assert!(!f.contains_zero);
        for z in &f.boundary_points {
            assert!(z.im.abs() < 1e-12 && z.re > 1.0 - 1e-12 && z.re < 3.0 + 1e-12);
        }
    }

    #[test]
    fn identity_any_gram() {
        let g = real(2, &[2.0, 1.0, 1.0, 3.0]);
        let f = field_of_values(&ComplexMatrix::identity(2), &g, 32).unwrap();
        assert_abs_diff_eq!(f.v_h, 1.0, epsilon = 1e-12);
        for z in &f.boundary_points {
            assert_abs_diff_eq!((z - 1.0).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn jordan_block_disk() {
        let f = field_of_values(&real(2, &[0.0, 1.0, 0.0, 0.0]), &ComplexMatrix::identity(2), 128).unwrap();
        assert_eq!(f.v_h, 0.0);
        assert!(f.contains_zero);
        for (t, z) in f.angles.iter().zip(&f.boundary_points) {
            assert_abs_diff_eq!((z - Complex64::from_polar(0.5, *t)).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(field_of_values(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2), 8).is_err());
    }

    #[test]
    fn hpd_is_elliptic() {
        let q = real(2, &[2.0, 1.0, 1.0, 2.0]);
        let r = coercivity_check(&q, &ComplexMatrix::identity(2)).unwrap();
        assert!(r.elliptic && r.h_normal);
        assert_abs_diff_eq!(r.v_h, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.min_real_part, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn diag_one_i() {
        let i = Complex64::new(0.0, 1.0);
        let q = ComplexMatrix::from_diag(&[Complex64::new(1.0, 0.0), i]);
        let r = coercivity_check(&q, &ComplexMatrix::identity(2)).unwrap();
        assert!(r.h_normal && r.elliptic);
        assert_abs_diff_eq!(r.v_h, 0.5f64.sqrt(), epsilon = 1e-9);
        let f = field_of_values_default(&q, &ComplexMatrix::identity(2)).unwrap();
        for z in &f.boundary_points {
            // on the segment from 1 to i: re + im = 1, both in [0, 1]
            assert_abs_diff_eq!(z.re + z.im, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn carleman_examples() {
        let k = ComplexMatrix::from_real_diag(&[1.0, 0.5, 0.25]);
        let id = ComplexMatrix::identity(3);
        let d = carleman_diagnostics(&k, &id, &id, 2.0).unwrap();
        assert_abs_diff_eq!(d.partial_means[1], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(d.carleman_norm, 21f64.sqrt() / 4.0, epsilon = 1e-15);
        let z = carleman_diagnostics(&ComplexMatrix::zeros(3, 3), &id, &id, 2.0).unwrap();
        assert!(z.partial_means.iter().all(|&m| m == 0.0));
        assert_eq!(z.carleman_norm, 0.0);
    }

    #[test]
    fn hull_and_distance() {
        let pts: Vec<Complex64> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)]
            .iter()
            .map(|&(a, b)| Complex64::new(a, b))
            .collect();
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert_eq!(hull_distance(&h, Complex64::new(0.5, 0.5)), 0.0);
        assert_abs_diff_eq!(hull_distance(&h, Complex64::new(2.0, 0.5)), 1.0, epsilon = 1e-15);
    }
}
