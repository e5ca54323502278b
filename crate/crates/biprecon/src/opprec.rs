//! Operator-preconditioned systems `P_μ A_ν u = P_μ b_ν` with
//! `P = M⁻¹CN⁻¹`.
//!
//! The preconditioned operator is applied as a chain: solve `N v = A u`,
//! multiply `w = C v`, solve `M q = w`. Explicit products are formed only
//! for diagnostics.

use crate::config::FOV_SAMPLES;
use crate::densela::{general_eigen, singular_values, ComplexMatrix, ComplexVector, DenseError, LuFactors};
use crate::fov::{field_of_values, FovError};
use crate::perturb::{perturb_operator, perturb_rhs, PerturbError, PerturbationMeasure, PerturbationSpec};
use crate::problems::{PreconditionerSet, ProblemError, ProblemInstance};
use crate::spaces::DiscreteSpace;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum OpPrecError {
    #[error("space chain mismatch: {0}")]
    SpaceMismatch(String),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Fov(#[from] FovError),
}

/// Discrete constants of the unperturbed operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseConstants {
    pub gamma_a: f64,
    pub norm_a: f64,
    pub gamma_c: f64,
    pub norm_c: f64,
    pub gamma_m: f64,
    pub norm_m: f64,
    pub gamma_n: f64,
    pub norm_n: f64,
}

impl BaseConstants {
    /// `‖m‖‖n‖‖c‖‖a‖/(γ_Mγ_Nγ_Cγ_A)`.
    pub fn k_star(&self) -> f64 {
        (self.norm_m * self.norm_n * self.norm_c * self.norm_a) / (self.gamma_m * self.gamma_n * self.gamma_c * self.gamma_a)
    }
}

/// Measured sizes of the perturbations applied to `C`, `A` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppliedPerturbations {
    pub c: PerturbationMeasure,
    pub a: PerturbationMeasure,
    pub rhs: f64,
}

/// A problem with its preconditioner, possibly perturbed.
#[derive(Debug, Clone)]
pub struct PreconditionedSystem {
    pub problem: ProblemInstance,
    pub precond: PreconditionerSet,
    pub mu: f64,
    pub nu: f64,
    pub nu_rhs: f64,
    base: BaseConstants,
    applied: Option<AppliedPerturbations>,
    m_lu: Arc<LuFactors>,
    n_lu: Arc<LuFactors>,
}

/// Condition-number constants of a preconditioned system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionConstants {
    /// `‖a‖/γ_A`.
    pub k_a: f64,
    /// Bound constant from the unperturbed operators.
    pub k_star: f64,
    /// `k_star·((1+μ)/(1−μ))·((1+ν)/(1−ν))`.
    pub k_star_mu_nu: f64,
    /// Same product evaluated with the measured constants of `C_μ` and `A_ν`.
    pub k_star_measured: f64,
    /// `√(λ_max/λ_min)` of the X-Gram.
    pub k_lambda: f64,
    /// `|λ|_max/|λ|_min` of `P_μA_ν`.
    pub kappa_s: f64,
    /// `σ₁/σ_N` of `P_μA_ν`.
    pub kappa_2: f64,
}

/// Distances of `F_H(PA)` and `F_H((PA)⁻¹)` from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityConstants {
    pub v_h: f64,
    pub v_h_inv: f64,
    pub coercivity_failed: bool,
}

/// The bi-parametric factor `((1+μ)/(1−μ))·((1+ν)/(1−ν))`.
pub fn bi_parametric_factor(mu: f64, nu: f64) -> f64 {
    ((1.0 + mu) / (1.0 - mu)) * ((1.0 + nu) / (1.0 - nu))
}

impl PreconditionedSystem {
    /// Unperturbed system; checks that `M` starts in the domain of `A` and
    /// `N` ends in its range.
    pub fn new(problem: ProblemInstance, precond: PreconditionerSet) -> Result<Self, OpPrecError> {
        let a = &problem.op;
        if precond.m.domain().label() != a.domain().label() {
            return Err(OpPrecError::SpaceMismatch(format!(
                "M starts in {} but A in {}",
                precond.m.domain().label(),
                a.domain().label()
            )));
        }
        if precond.n.range_dual().label() != a.range_dual().label() {
            return Err(OpPrecError::SpaceMismatch(format!(
                "N ends in {} but A in {}",
                precond.n.range_dual().label(),
                a.range_dual().label()
            )));
        }
        if problem.rhs.len() != a.dim() {
            return Err(OpPrecError::SpaceMismatch("right-hand side has wrong dimension".into()));
        }
        let base = BaseConstants {
            gamma_a: a.gamma(),
            norm_a: a.cont_norm(),
            gamma_c: precond.c.gamma(),
            norm_c: precond.c.cont_norm(),
            gamma_m: precond.m.gamma(),
            norm_m: precond.m.cont_norm(),
            gamma_n: precond.n.gamma(),
            norm_n: precond.n.cont_norm(),
        };
        let m_lu = Arc::new(LuFactors::new(precond.m.matrix())?);
        let n_lu = Arc::new(LuFactors::new(precond.n.matrix())?);
        Ok(Self {
            problem,
            precond,
            mu: 0.0,
            nu: 0.0,
            nu_rhs: 0.0,
            base,
            applied: None,
            m_lu,
            n_lu,
        })
    }

    /// Perturbs `C` by `mu`, `A` by `nu` and `b` by `nu_rhs` (seeded with
    /// `rhs_seed`), keeping the constants of the unperturbed system.
    pub fn perturbed(
        &self,
        mu: &PerturbationSpec,
        nu: &PerturbationSpec,
        nu_rhs: f64,
        rhs_seed: u64,
    ) -> Result<Self, OpPrecError> {
        let c = perturb_operator(&self.precond.c, mu)?;
        let a = perturb_operator(&self.problem.op, nu)?;
        let rhs = perturb_rhs(&self.problem.rhs, self.problem.op.range_dual(), nu_rhs, rhs_seed)?;
        let rhs_measure = crate::perturb::measure_rhs_perturbation(&self.problem.rhs, &rhs, self.problem.op.range_dual())?;
        let mut problem = self.problem.clone();
        problem.op = a.op;
        problem.rhs = rhs;
        let precond = PreconditionerSet::new(c.op, self.precond.m.clone(), self.precond.n.clone(), false)?;
        Ok(Self {
            problem,
            precond,
            mu: mu.level,
            nu: nu.level,
            nu_rhs,
            base: self.base,
            applied: Some(AppliedPerturbations {
                c: c.measure,
                a: a.measure,
                rhs: rhs_measure,
            }),
            m_lu: self.m_lu.clone(),
            n_lu: self.n_lu.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn base_constants(&self) -> &BaseConstants {
        &self.base
    }

    pub fn applied_perturbations(&self) -> Option<&AppliedPerturbations> {
        self.applied.as_ref()
    }

    /// The trial space `X`.
    pub fn x_space(&self) -> &Arc<DiscreteSpace> {
        self.problem.op.domain()
    }

    /// `P r = M⁻¹ C N⁻¹ r`.
    pub fn apply_p(&self, r: &[Complex64]) -> Result<ComplexVector, OpPrecError> {
        let v = self.n_lu.solve(r)?;
        let w = self.precond.c.matrix().matvec(&v);
        Ok(self.m_lu.solve(&w)?)
    }

    /// `P_μ A_ν u` through the solve/multiply chain.
    pub fn apply(&self, u: &[Complex64]) -> Result<ComplexVector, OpPrecError> {
        if u.len() != self.dim() {
            return Err(OpPrecError::Dense(DenseError::DimensionMismatch {
                expected: self.dim(),
                found: u.len(),
            }));
        }
        self.apply_p(&self.problem.op.matrix().matvec(u))
    }

    /// `P_μ b_ν`.
    pub fn preconditioned_rhs(&self) -> Result<ComplexVector, OpPrecError> {
        self.apply_p(&self.problem.rhs)
    }

    /// Explicit `P = M⁻¹CN⁻¹`.
    pub fn explicit_p(&self) -> Result<ComplexMatrix, OpPrecError> {
        let ninv = self.n_lu.inverse()?;
        Ok(self.m_lu.solve_matrix(&self.precond.c.matrix().matmul(&ninv))?)
    }

    /// Explicit `P_μA_ν`.
    pub fn explicit_pa(&self) -> Result<ComplexMatrix, OpPrecError> {
        let ninv_a = self.n_lu.solve_matrix(self.problem.op.matrix())?;
        Ok(self.m_lu.solve_matrix(&self.precond.c.matrix().matmul(&ninv_a))?)
    }

    /// Explicit `(P_μA_ν)⁻¹ = A_ν⁻¹ N C_μ⁻¹ M`.
    pub fn explicit_pa_inverse(&self) -> Result<ComplexMatrix, OpPrecError> {
        let cinv_m = LuFactors::new(self.precond.c.matrix())?.solve_matrix(self.precond.m.matrix())?;
        let n_cinv_m = self.precond.n.matrix().matmul(&cinv_m);
        Ok(LuFactors::new(self.problem.op.matrix())?.solve_matrix(&n_cinv_m)?)
    }

    /// `K_{μ,ν} = C_μ N⁻¹ A_ν − M`, the compact part of the preconditioned chain.
    pub fn chain_compact_part(&self) -> Result<ComplexMatrix, OpPrecError> {
        let ninv_a = self.n_lu.solve_matrix(self.problem.op.matrix())?;
        Ok(self.precond.c.matrix().matmul(&ninv_a).sub(self.precond.m.matrix()))
    }

    /// Condition constants; see [`ConditionConstants`].
    pub fn condition_constants(&self) -> Result<ConditionConstants, OpPrecError> {
        let pa = self.explicit_pa()?;
        let moduli = general_eigen(&pa)?.moduli();
        let kappa_s = moduli[0] / moduli[moduli.len() - 1];
        let sv = singular_values(&pa);
        let kappa_2 = sv[0] / sv[sv.len() - 1];
        let k_star = self.base.k_star();
        let measured = BaseConstants {
            gamma_a: self.problem.op.gamma(),
            norm_a: self.problem.op.cont_norm(),
            gamma_c: self.precond.c.gamma(),
            norm_c: self.precond.c.cont_norm(),
            ..self.base
        };
        Ok(ConditionConstants {
            k_a: self.base.norm_a / self.base.gamma_a,
            k_star,
            k_star_mu_nu: k_star * bi_parametric_factor(self.mu, self.nu),
            k_star_measured: measured.k_star(),
            k_lambda: self.x_space().synthesis_constants().k_lambda,
            kappa_s,
            kappa_2,
        })
    }

    /// Field-of-values distances of `PA` and its inverse in the X-Gram geometry.
    pub fn coercivity_constants(&self) -> Result<CoercivityConstants, OpPrecError> {
        let gram = self.x_space().gram();
        let v_h = field_of_values(&self.explicit_pa()?, gram, FOV_SAMPLES)?.v_h;
        let v_h_inv = field_of_values(&self.explicit_pa_inverse()?, gram, FOV_SAMPLES)?.v_h;
        Ok(CoercivityConstants {
            v_h,
            v_h_inv,
            coercivity_failed: v_h == 0.0 || v_h_inv == 0.0,
        })
    }
}

/// `P_μA_ν u` through the chain.
pub fn apply_preconditioned(sys: &PreconditionedSystem, u: &[Complex64]) -> Result<ComplexVector, OpPrecError> {
    sys.apply(u)
}

/// See [`PreconditionedSystem::condition_constants`].
pub fn condition_constants(sys: &PreconditionedSystem) -> Result<ConditionConstants, OpPrecError> {
    sys.condition_constants()
}

/// See [`PreconditionedSystem::coercivity_constants`].
pub fn coercivity_constants(sys: &PreconditionedSystem) -> Result<CoercivityConstants, OpPrecError> {
    sys.coercivity_constants()
}
