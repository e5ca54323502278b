//! Controlled perturbations of Galerkin operators and right-hand sides.
//!
//! An operator perturbation `A_ν` satisfies
//! `‖H_Y^{-1/2}(A − A_ν)H_X^{-1/2}‖₂ ≤ ν·γ_A`; a right-hand side perturbation
//! satisfies `‖b − b_ν‖' ≤ ν‖b‖'` in the dual norm of the range space.
//! The same routine perturbs the preconditioner `C` by `μ`.

use crate::densela::{singular_values, svd, ComplexMatrix, ComplexVector, DenseError};
use crate::problems::{GalerkinOperator, ProblemError};
use crate::rng::Lcg64;
use crate::spaces::{normalized_operator, DiscreteSpace, SpaceError};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum PerturbError {
    #[error("perturbation level must lie in [0,1), got {0}")]
    InvalidLevel(f64),
    #[error("operators act between different spaces")]
    SpaceMismatch,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// How the raw perturbation is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    /// Dense complex noise rescaled to the exact budget.
    DenseRandom,
    /// Rank truncation of the normalized operator.
    SvdTruncation,
    /// Zeroing of the smallest-magnitude entries.
    EntryDrop,
}

impl std::str::FromStr for PerturbationMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dense-random" | "denseRandom" => Ok(Self::DenseRandom),
            "svd-truncation" | "svdTruncation" => Ok(Self::SvdTruncation),
            "entry-drop" | "entryDrop" => Ok(Self::EntryDrop),
            other => Err(format!("unknown perturbation mode '{other}'")),
        }
    }
}

/// Level, mode and seed of a perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationSpec {
    pub level: f64,
    pub mode: PerturbationMode,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(level: f64, mode: PerturbationMode, seed: u64) -> Result<Self, PerturbError> {
        if !(0.0..1.0).contains(&level) {
            return Err(PerturbError::InvalidLevel(level));
        }
        Ok(Self { level, mode, seed })
    }
}

/// Measured relative size of a perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationMeasure {
    pub nu_actual: f64,
}

/// Raised when the requested mode cannot meet the budget; the operator is
/// then returned unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PerturbationWarning {
    /// Even the rank-(N−1) truncation exceeds the level; carries its measured size.
    TruncationInfeasible { nu_rank_deficient: f64 },
}

/// A perturbed operator with its measured size.
#[derive(Debug, Clone)]
pub struct PerturbedOperator {
    pub op: GalerkinOperator,
    pub measure: PerturbationMeasure,
    pub warning: Option<PerturbationWarning>,
}

fn induced_norm(e: &ComplexMatrix, op: &GalerkinOperator) -> f64 {
    singular_values(&normalized_operator(e, op.domain(), op.range_dual()))
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Builds `A_ν` according to `spec`.
pub fn perturb_operator(op: &GalerkinOperator, spec: &PerturbationSpec) -> Result<PerturbedOperator, PerturbError> {
    if !(0.0..1.0).contains(&spec.level) {
        return Err(PerturbError::InvalidLevel(spec.level));
    }
    if spec.level == 0.0 {
        return Ok(PerturbedOperator {
            op: op.clone(),
            measure: PerturbationMeasure { nu_actual: 0.0 },
            warning: None,
        });
    }
    let n = op.dim();
    let budget = spec.level * op.gamma();
    match spec.mode {
        PerturbationMode::DenseRandom => {
            let mut g = Lcg64::new(spec.seed);
            let e = ComplexMatrix::from_fn(n, n, |_, _| g.complex());
            let size = induced_norm(&e, op);
            let e = e.scale_real(budget / size);
            let perturbed = op.with_matrix(op.matrix().add(&e))?;
            let measure = measure_perturbation(op, &perturbed)?;
            Ok(PerturbedOperator {
                op: perturbed,
                measure,
                warning: None,
            })
        }
        PerturbationMode::SvdTruncation => {
            let hat = normalized_operator(op.matrix(), op.domain(), op.range_dual());
            let f = svd(&hat, true)?;
            let sigma = &f.values;
            // Truncating to rank r costs σ_{r+1}; search from the largest rank down.
            let feasible = (1..n).rev().find(|&r| sigma[r] / op.gamma() <= spec.level);
            match feasible {
                None => Ok(PerturbedOperator {
                    op: op.clone(),
                    measure: PerturbationMeasure { nu_actual: 0.0 },
                    warning: Some(PerturbationWarning::TruncationInfeasible {
                        nu_rank_deficient: sigma[n - 1] / op.gamma(),
                    }),
                }),
                Some(rank) => {
                    let u = f.u.expect("factors requested");
                    let v = f.v.expect("factors requested");
                    let trunc = ComplexMatrix::from_fn(n, n, |i, j| {
                        (0..rank).map(|k| u[(i, k)] * sigma[k] * v[(j, k)].conj()).sum::<Complex64>()
                    });
                    let restored = op.range_dual().sqrt_gram().matmul(&trunc).matmul(op.domain().sqrt_gram());
                    let perturbed = op.with_matrix(restored)?;
                    let measure = measure_perturbation(op, &perturbed)?;
                    Ok(PerturbedOperator {
                        op: perturbed,
                        measure,
                        warning: None,
                    })
                }
            }
        }
        PerturbationMode::EntryDrop => {
            let mut order: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
            order.sort_by(|a, b| {
                op.matrix()[*a]
                    .norm()
                    .total_cmp(&op.matrix()[*b].norm())
                    .then(a.cmp(b))
            });
            let dropped = |count: usize| {
                let mut e = ComplexMatrix::zeros(n, n);
                for &(i, j) in &order[..count] {
                    e[(i, j)] = -op.matrix()[(i, j)];
                }
                e
            };
            let fits = |count: usize| induced_norm(&dropped(count), op) <= budget;
            // Largest prefix within budget by bisection, then verified.
            let (mut lo, mut hi) = (0usize, order.len());
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if fits(mid) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            while lo > 0 && !fits(lo) {
                lo -= 1;
            }
            let perturbed = op.with_matrix(op.matrix().add(&dropped(lo)))?;
            let measure = measure_perturbation(op, &perturbed)?;
            Ok(PerturbedOperator {
                op: perturbed,
                measure,
                warning: None,
            })
        }
    }
}

/// `b_ν = b + e` with random `e` rescaled to `‖e‖' = ν‖b‖'`.
pub fn perturb_rhs(b: &[Complex64], range_dual: &DiscreteSpace, level: f64, seed: u64) -> Result<ComplexVector, PerturbError> {
    if !(0.0..1.0).contains(&level) {
        return Err(PerturbError::InvalidLevel(level));
    }
    let bnorm = range_dual.dual_norm(b)?;
    if level == 0.0 || bnorm == 0.0 {
        return Ok(b.to_vec());
    }
    let mut g = Lcg64::new(seed);
    let e: ComplexVector = (0..b.len()).map(|_| g.complex()).collect();
    let enorm = range_dual.dual_norm(&e)?;
    let s = level * bnorm / enorm;
    Ok(b.iter().zip(&e).map(|(bi, ei)| bi + ei * s).collect())
}

/// `σ_max(H_Y^{-1/2}(A − A_ν)H_X^{-1/2}) / γ_A`.
pub fn measure_perturbation(original: &GalerkinOperator, perturbed: &GalerkinOperator) -> Result<PerturbationMeasure, PerturbError> {
    if !original.domain().same_geometry(perturbed.domain()) || !original.range_dual().same_geometry(perturbed.range_dual()) {
        return Err(PerturbError::SpaceMismatch);
    }
    let diff = original.matrix().sub(perturbed.matrix());
    Ok(PerturbationMeasure {
        nu_actual: induced_norm(&diff, original) / original.gamma(),
    })
}

/// Relative dual-norm size `‖b − b_ν‖'/‖b‖'` of a right-hand side perturbation.
pub fn measure_rhs_perturbation(b: &[Complex64], b_nu: &[Complex64], range_dual: &DiscreteSpace) -> Result<f64, PerturbError> {
    let bnorm = range_dual.dual_norm(b)?;
    let diff: ComplexVector = b.iter().zip(b_nu).map(|(x, y)| x - y).collect();
    let d = range_dual.dual_norm(&diff)?;
    Ok(if bnorm == 0.0 { 0.0 } else { d / bnorm })
}
