//! Bound verification: condition numbers, linear and super-linear GMRES
//! rates, CG rates, the Strang error study and parameter sweeps.
//!
//! Every bound line is computed from constants measured before the solve.
//! A report whose hypotheses fail on the instance (for example a field of
//! values touching the origin) is marked not applicable, never violated.

use crate::config::{CONDITION_BOUND_TOL, CROSS_NORM_TOL, FOV_RATIO_TOL, FOV_SAMPLES, RATE_BOUND_TOL};
use crate::densela::{general_eigen, singular_values, ComplexMatrix, DenseError, LuFactors};
use crate::fov::{carleman_diagnostics, field_of_values, FovError};
use crate::krylov::{cg_solve, gmres_solve, residual_cross_check, CgErrorHistory, KrylovError, Method, ResidualHistory, SolveConfig};
use crate::opprec::{bi_parametric_factor, CoercivityConstants, OpPrecError, PreconditionedSystem};
use crate::perturb::{perturb_operator, perturb_rhs, PerturbError, PerturbationMode, PerturbationSpec};
use crate::problems::{circle_fourier, circle_exact, circle_modes, circle_weight, ProblemError};
use crate::spaces::normalized_operator;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum BoundsError {
    #[error("problem has no compact part; super-linear bounds need a second-kind operator")]
    MissingCompactPart,
    #[error("problem has no exact solution")]
    MissingExactSolution,
    #[error("invalid study setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    OpPrec(#[from] OpPrecError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Fov(#[from] FovError),
    #[error(transparent)]
    Dense(#[from] DenseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundStatus {
    Satisfied,
    Violated,
    NotApplicable,
}

/// How much a measurement may exceed its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
}

impl Tolerance {
    fn allowance(self, bound: f64) -> f64 {
        match self {
            Self::Absolute(t) => t,
            Self::Relative(t) => t * bound.abs(),
        }
    }
}

/// Tolerance attached to each bound id.
pub fn tolerance(bound_id: &str) -> Tolerance {
    match bound_id {
        "spectral-condition" | "euclidean-condition" | "spectral-condition-biparametric" | "euclidean-condition-biparametric" | "coercivity-lower" | "coercivity-inverse-lower" | "carleman-tail" => {
            Tolerance::Absolute(CONDITION_BOUND_TOL)
        }
        "gmres-fov-linear" => Tolerance::Absolute(FOV_RATIO_TOL),
        _ => Tolerance::Relative(RATE_BOUND_TOL),
    }
}

/// Where a report came from.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundContext {
    pub family: String,
    pub n: usize,
    pub mu: f64,
    pub nu: f64,
    pub solver: Option<String>,
}

impl BoundContext {
    pub fn of(sys: &PreconditionedSystem, solver: Option<String>) -> Self {
        Self {
            family: sys.problem.family.name().to_string(),
            n: sys.dim(),
            mu: sys.mu,
            nu: sys.nu,
            solver,
        }
    }
}

/// Measured values against bound values, entry by entry.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub bound_id: String,
    pub context: BoundContext,
    pub measured: Vec<f64>,
    pub bound: Vec<f64>,
    pub satisfied: bool,
    pub status: BoundStatus,
    /// `min(bound − measured)`; negative only when violated.
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    /// Compares entries with the tolerance of `bound_id`.
    pub fn evaluate(bound_id: &str, context: BoundContext, measured: Vec<f64>, bound: Vec<f64>) -> Self {
        Self::evaluate_with(bound_id, context, measured, bound, tolerance(bound_id))
    }

    pub fn evaluate_with(bound_id: &str, context: BoundContext, measured: Vec<f64>, bound: Vec<f64>, tol: Tolerance) -> Self {
        assert_eq!(measured.len(), bound.len(), "measured and bound lengths differ");
        let margin = measured
            .iter()
            .zip(&bound)
            .map(|(m, b)| b - m)
            .fold(f64::INFINITY, f64::min);
        let ok = measured
            .iter()
            .zip(&bound)
            .all(|(m, b)| m.is_finite() && b.is_finite() && *m <= b + tol.allowance(*b));
        let status = if measured.is_empty() {
            BoundStatus::NotApplicable
        } else if ok {
            BoundStatus::Satisfied
        } else {
            BoundStatus::Violated
        };
        Self {
            bound_id: bound_id.to_string(),
            context,
            measured,
            bound,
            satisfied: status == BoundStatus::Satisfied,
            status,
            margin: if margin.is_finite() { margin } else { 0.0 },
            note: None,
        }
    }

    pub fn not_applicable(bound_id: &str, context: BoundContext, why: impl Into<String>) -> Self {
        Self {
            bound_id: bound_id.to_string(),
            context,
            measured: vec![],
            bound: vec![],
            satisfied: false,
            status: BoundStatus::NotApplicable,
            margin: 0.0,
            note: Some(why.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_violation(&self) -> bool {
        self.status == BoundStatus::Violated
    }
}

/// `κ_S ≤ K★` and `κ₂ ≤ K★K_Λ²`, with `K★` replaced by `K★,μ,ν` on
/// perturbed systems.
pub fn check_condition_bounds(sys: &PreconditionedSystem) -> Result<Vec<BoundReport>, BoundsError> {
    let cc = sys.condition_constants()?;
    let ctx = BoundContext::of(sys, None);
    let unperturbed = sys.mu == 0.0 && sys.nu == 0.0;
    let (ids, k) = if unperturbed {
        (["spectral-condition", "euclidean-condition"], cc.k_star)
    } else {
        (["spectral-condition-biparametric", "euclidean-condition-biparametric"], cc.k_star_mu_nu)
    };
    Ok(vec![
        BoundReport::evaluate(ids[0], ctx.clone(), vec![cc.kappa_s], vec![k]),
        BoundReport::evaluate(ids[1], ctx, vec![cc.kappa_2], vec![k * cc.k_lambda * cc.k_lambda]),
    ])
}

/// Field-of-values distances of `PA` and `(PA)⁻¹` in the geometry of `gram`.
pub fn coercivity_in(sys: &PreconditionedSystem, gram: &ComplexMatrix) -> Result<CoercivityConstants, BoundsError> {
    let v_h = field_of_values(&sys.explicit_pa()?, gram, FOV_SAMPLES)?.v_h;
    let v_h_inv = field_of_values(&sys.explicit_pa_inverse()?, gram, FOV_SAMPLES)?.v_h;
    Ok(CoercivityConstants {
        v_h,
        v_h_inv,
        coercivity_failed: v_h == 0.0 || v_h_inv == 0.0,
    })
}

/// The coercivity hypothesis of the linear GMRES theorem, measured:
/// `γ_{C_μ}γ_{A_ν}/(‖m‖‖n‖) ≤ V_H(PA)` and `γ_Mγ_N/(‖c_μ‖‖a_ν‖) ≤ V_H((PA)⁻¹)`.
///
/// A failing hypothesis yields not-applicable reports.
pub fn check_coercivity_assumption(sys: &PreconditionedSystem, co: &CoercivityConstants) -> Vec<BoundReport> {
    let ctx = BoundContext::of(sys, None);
    let (c, m, n, a) = (&sys.precond.c, &sys.precond.m, &sys.precond.n, &sys.problem.op);
    let lower = c.gamma() * a.gamma() / (m.cont_norm() * n.cont_norm());
    let lower_inv = m.gamma() * n.gamma() / (c.cont_norm() * a.cont_norm());
    [("coercivity-lower", lower, co.v_h), ("coercivity-inverse-lower", lower_inv, co.v_h_inv)]
        .into_iter()
        .map(|(id, l, v)| {
            let r = BoundReport::evaluate(id, ctx.clone(), vec![l], vec![v]);
            if r.satisfied {
                r
            } else {
                BoundReport::not_applicable(id, ctx.clone(), format!("hypothesis fails on this instance: lower {l:.6e} > measured {v:.6e}"))
            }
        })
        .collect()
}

/// The two minimal-residual cross inequalities between a Euclidean and a
/// weighted run, with slack relative to the initial residual.
fn cross_norm_reports(
    sys: &PreconditionedSystem,
    eh: &ResidualHistory,
    wh: &ResidualHistory,
    gram: &ComplexMatrix,
    ectx: BoundContext,
    wctx: BoundContext,
) -> Result<[BoundReport; 2], BoundsError> {
    let f = sys.preconditioned_rhs()?;
    let cross = residual_cross_check(sys, &f, eh, wh, gram)?;
    let slack2 = CROSS_NORM_TOL * cross.euclid_2[0];
    let slackh = CROSS_NORM_TOL * cross.euclid_h[0];
    Ok([
        BoundReport::evaluate_with("cross-norm-euclidean", ectx, cross.euclid_2, cross.weighted_2, Tolerance::Absolute(slack2)),
        BoundReport::evaluate_with("cross-norm-weighted", wctx, cross.weighted_h, cross.euclid_h, Tolerance::Absolute(slackh)),
    ])
}

/// Outcome of [`check_gmres_linear`].
#[derive(Debug, Clone)]
pub struct LinearCheck {
    pub reports: Vec<BoundReport>,
    pub coercivity: CoercivityConstants,
    pub weighted: ResidualHistory,
    pub euclidean: ResidualHistory,
}

fn describe(cfg: &SolveConfig, method: Method) -> String {
    let m = match method {
        Method::Gmres => "gmres",
        Method::WeightedGmres => "weightedGmres",
        Method::Cg => "cg",
    };
    match cfg.restart {
        Some(r) => format!("{m}({r}) tol={:e}", cfg.tol),
        None => format!("{m} tol={:e}", cfg.tol),
    }
}

/// Linear GMRES(m) bounds: the field-of-values form
/// `‖r_k‖_H/‖r₀‖_H ≤ (1 − V_H(Q)V_H(Q⁻¹))^{k/2}`, the weighted rate
/// `Θ_k ≤ (1 − 1/K★,μ,ν)^{1/2}`, the Euclidean rate
/// `Θ̃_k ≤ K_Λ(1 − 1/K★,μ,ν)^{1/2}`, and the minimal-residual cross norms.
///
/// Runs one weighted and one Euclidean solve with the restart, tolerance
/// and weight of `cfg`.
pub fn check_gmres_linear(sys: &PreconditionedSystem, cfg: &SolveConfig) -> Result<LinearCheck, BoundsError> {
    let x_gram = sys.x_space().clone();
    let weight = cfg.weight.clone().unwrap_or_else(|| x_gram.clone());
    let weighted_x = weight.same_geometry(&x_gram);
    let mut wcfg = cfg.clone();
    wcfg.method = Method::WeightedGmres;
    wcfg.weight = Some(weight.clone());
    let mut ecfg = cfg.clone();
    ecfg.method = Method::Gmres;
    ecfg.weight = None;

    // Everything a bound depends on is measured before solving.
    let co = coercivity_in(sys, weight.gram())?;
    let cc = sys.condition_constants()?;
    let assumption = if weighted_x {
        check_coercivity_assumption(sys, &co)
    } else {
        vec![]
    };
    let assumption_holds = weighted_x && assumption.iter().all(|r| r.satisfied);

    let (_, wh) = gmres_solve(sys, &wcfg)?;
    let (_, eh) = gmres_solve(sys, &ecfg)?;
    let ks: Vec<usize> = (1..wh.norms.len()).collect();
    let wctx = BoundContext::of(sys, Some(describe(&wcfg, Method::WeightedGmres)));
    let ectx = BoundContext::of(sys, Some(describe(&ecfg, Method::Gmres)));
    let mut reports = assumption;

    let prod = co.v_h * co.v_h_inv;
    reports.push(if co.coercivity_failed {
        BoundReport::not_applicable("gmres-fov-linear", wctx.clone(), "field of values contains the origin")
    } else {
        let rho2 = (1.0 - prod).max(0.0);
        BoundReport::evaluate(
            "gmres-fov-linear",
            wctx.clone(),
            ks.iter().map(|&k| wh.relative(k)).collect(),
            ks.iter().map(|&k| rho2.powf(k as f64 / 2.0)).collect(),
        )
    });

    let rho = (1.0 - 1.0 / cc.k_star_mu_nu).max(0.0).sqrt();
    if assumption_holds {
        reports.push(BoundReport::evaluate(
            "gmres-linear-weighted",
            wctx.clone(),
            ks.iter().map(|&k| wh.rates[k]).collect(),
            vec![rho; ks.len()],
        ));
        let eks: Vec<usize> = (1..eh.norms.len()).collect();
        reports.push(BoundReport::evaluate(
            "gmres-linear-euclidean",
            ectx.clone(),
            eks.iter().map(|&k| eh.rates[k]).collect(),
            vec![cc.k_lambda * rho; eks.len()],
        ));
    } else {
        let why = if weighted_x {
            "coercivity hypothesis not met"
        } else {
            "weight differs from the X-Gram"
        };
        reports.push(BoundReport::not_applicable("gmres-linear-weighted", wctx.clone(), why));
        reports.push(BoundReport::not_applicable("gmres-linear-euclidean", ectx.clone(), why));
    }

    reports.extend(cross_norm_reports(sys, &eh, &wh, weight.gram(), ectx, wctx)?);
    Ok(LinearCheck {
        reports,
        coercivity: co,
        weighted: wh,
        euclidean: eh,
    })
}

/// Outcome of [`check_gmres_superlinear`].
#[derive(Debug, Clone)]
pub struct SuperlinearCheck {
    pub reports: Vec<BoundReport>,
    /// Per-k bound line for the weighted rates, entry `k−1`.
    pub bound_line: Vec<f64>,
    /// `1/((1−μ)(1−ν))`.
    pub factor: f64,
    pub singular_values: Vec<f64>,
    pub partial_means: Vec<f64>,
    pub carleman_norm: f64,
    pub weighted: ResidualHistory,
    pub euclidean: ResidualHistory,
}

/// Super-linear GMRES bounds for second-kind problems.
///
/// With `Q = P_μA_ν = I + M⁻¹K_{μ,ν}`, `K_{μ,ν} = C_μN⁻¹A_ν − M`, the
/// weighted rate obeys `Θ_k ≤ ‖Q⁻¹‖_H·σ̄_k^H(M⁻¹K_{μ,ν})` and
/// `‖Q⁻¹‖_H ≤ ‖m‖‖n‖/(γ_Cγ_A(1−μ)(1−ν))` from the unperturbed constants.
/// When `C = M` and nothing is perturbed this is the `N⁻¹A = I + N⁻¹K`
/// case with `‖Q⁻¹‖_H ≤ ‖n‖/γ_A`. The Euclidean rate carries an extra
/// `K_Λ`, and both runs are cross-checked for the minimal-residual
/// inequalities. The Carleman tail `σ̄_k ≤ |||K|||_p k^{-1/p}` is checked for
/// every `k` up to the dimension.
///
/// Rates are compared only at iterations the solver actually reached;
/// once the relative residual meets `cfg.tol` the run stops.
pub fn check_gmres_superlinear(sys: &PreconditionedSystem, cfg: &SolveConfig) -> Result<SuperlinearCheck, BoundsError> {
    if sys.problem.compact_part.is_none() {
        return Err(BoundsError::MissingCompactPart);
    }
    let p = sys.problem.carleman_index.unwrap_or(0.0);
    let b = *sys.base_constants();
    let pure = sys.mu == 0.0 && sys.nu == 0.0 && {
        let (c, m) = (sys.precond.c.matrix(), sys.precond.m.matrix());
        c.sub(m).max_abs() == 0.0
    };
    let factor = 1.0 / ((1.0 - sys.mu) * (1.0 - sys.nu));
    let x = sys.x_space();
    let (id, diag, scale) = if pure {
        let k = sys.problem.op.matrix().sub(sys.precond.n.matrix());
        let d = carleman_diagnostics(&k, sys.precond.n.matrix(), x.gram(), p)?;
        ("gmres-superlinear", d, b.norm_n / b.gamma_a)
    } else {
        let k = sys.chain_compact_part()?;
        let d = carleman_diagnostics(&k, sys.precond.m.matrix(), x.gram(), p)?;
        ("gmres-superlinear-biparametric", d, b.norm_m * b.norm_n / (b.gamma_c * b.gamma_a) * factor)
    };
    let k_lambda = x.synthesis_constants().k_lambda;

    let mut wcfg = cfg.clone();
    wcfg.method = Method::WeightedGmres;
    wcfg.weight = Some(x.clone());
    wcfg.restart = None;
    let mut ecfg = wcfg.clone();
    ecfg.method = Method::Gmres;
    ecfg.weight = None;
    let (_, wh) = gmres_solve(sys, &wcfg)?;
    let (_, eh) = gmres_solve(sys, &ecfg)?;
    let wctx = BoundContext::of(sys, Some(describe(&wcfg, Method::WeightedGmres)));
    let ectx = BoundContext::of(sys, Some(describe(&ecfg, Method::Gmres)));

    let line = |k: usize| scale * diag.partial_mean(k);
    let wk: Vec<usize> = (1..wh.norms.len()).collect();
    let ek: Vec<usize> = (1..eh.norms.len()).collect();
    let mut reports = vec![
        BoundReport::evaluate(id, wctx.clone(), wk.iter().map(|&k| wh.rates[k]).collect(), wk.iter().map(|&k| line(k)).collect())
            .with_note(format!("perturbation factor {factor:.6}")),
        BoundReport::evaluate(
            &format!("{id}-euclidean"),
            ectx.clone(),
            ek.iter().map(|&k| eh.rates[k]).collect(),
            ek.iter().map(|&k| k_lambda * line(k)).collect(),
        ),
    ];
    reports.extend(cross_norm_reports(sys, &eh, &wh, x.gram(), ectx, wctx.clone())?);
    if p > 0.0 {
        let n = diag.partial_means.len();
        reports.push(BoundReport::evaluate(
            "carleman-tail",
            wctx,
            diag.partial_means.clone(),
            (1..=n).map(|k| diag.carleman_norm * (k as f64).powf(-1.0 / p)).collect(),
        ));
    }
    Ok(SuperlinearCheck {
        reports,
        bound_line: (1..=sys.dim()).map(line).collect(),
        factor,
        singular_values: diag.singular_values,
        partial_means: diag.partial_means,
        carleman_norm: diag.carleman_norm,
        weighted: wh,
        euclidean: eh,
    })
}

/// Outcome of [`check_cg_elliptic`].
#[derive(Debug, Clone)]
pub struct CgCheck {
    pub reports: Vec<BoundReport>,
    pub history: CgErrorHistory,
}

/// `Θ_k^CG ≤ 2^{1/k}(1 − 2/(√K★,μ,ν + 1))`, and with a compact part the
/// eigenvalue-mean form
/// `Θ_k^CG ≤ 2‖m‖‖n‖/(γ_Cγ_A(1−μ)(1−ν))·(1/k)Σ_{j≤k}|λ_j(M⁻¹K_{μ,ν})|`.
pub fn check_cg_elliptic(sys: &PreconditionedSystem, cfg: &SolveConfig) -> Result<CgCheck, BoundsError> {
    let cc = sys.condition_constants()?;
    let b = *sys.base_constants();
    let eig_means = if sys.problem.compact_part.is_some() {
        let k = sys.chain_compact_part()?;
        let mk = LuFactors::new(sys.precond.m.matrix())?.solve_matrix(&k)?;
        let moduli = general_eigen(&mk)?.moduli();
        let mut acc = 0.0;
        Some(
            moduli
                .iter()
                .enumerate()
                .map(|(j, l)| {
                    acc += l;
                    acc / (j + 1) as f64
                })
                .collect::<Vec<f64>>(),
        )
    } else {
        None
    };
    let (_, h) = cg_solve(sys, cfg)?;
    let ctx = BoundContext::of(sys, Some(describe(cfg, Method::Cg)));
    let ks: Vec<usize> = (1..h.a_norm_errors.len()).collect();
    let q = 1.0 - 2.0 / (cc.k_star_mu_nu.sqrt() + 1.0);
    let mut reports = vec![BoundReport::evaluate(
        "cg-elliptic",
        ctx.clone(),
        ks.iter().map(|&k| h.rates[k]).collect(),
        ks.iter().map(|&k| 2f64.powf(1.0 / k as f64) * q).collect(),
    )];
    if let Some(means) = eig_means {
        let scale = 2.0 * b.norm_m * b.norm_n / (b.gamma_c * b.gamma_a) / ((1.0 - sys.mu) * (1.0 - sys.nu));
        let n = means.len();
        reports.push(BoundReport::evaluate(
            "cg-superlinear",
            ctx,
            ks.iter().map(|&k| h.rates[k]).collect(),
            ks.iter()
                .map(|&k| scale * if k <= n { means[k - 1] } else { means[n - 1] * n as f64 / k as f64 })
                .collect(),
        ));
    }
    Ok(CgCheck { reports, history: h })
}

/// How the perturbation level follows the refinement in a Strang study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum NuRule {
    Zero,
    Fixed { nu: f64 },
    /// `ν = c·h^r`.
    Power { c: f64, r: f64 },
}

impl NuRule {
    pub fn level(&self, h: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Fixed { nu } => nu,
            Self::Power { c, r } => c * h.powf(r),
        }
    }
}

/// One refinement level of a Strang study.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StrangLevel {
    pub modes: usize,
    pub n: usize,
    pub h: f64,
    pub nu: f64,
    pub error_x: f64,
    pub best_approx: f64,
    /// `inf_w[(1 + K_A/(1−ν))‖u − w‖ + ν/(1−ν)‖w‖] + ν/(γ_A(1−ν))‖b_h‖′`.
    pub strang_inf: f64,
    /// `(1 + K_A)(1 + K_A/(1−ν))·best + 2ν/(γ_A(1−ν))‖b_h‖′`.
    pub strang_line: f64,
    /// `(1 + K_A)·best`, reported when `ν = 0`.
    pub cea: Option<f64>,
    pub k_a: f64,
}

/// Errors of perturbed Galerkin solutions on the circle family against
/// the analytic Fourier solution.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StrangStudy {
    pub rule: NuRule,
    pub reference_modes: usize,
    pub levels: Vec<StrangLevel>,
    /// Least-squares slope of `log error` against `log h`.
    pub order: f64,
}

impl StrangStudy {
    /// One report per bound line over all levels.
    pub fn reports(&self) -> Vec<BoundReport> {
        let ctx = BoundContext {
            family: "circle".into(),
            n: self.levels.last().map(|l| l.n).unwrap_or(0),
            mu: 0.0,
            nu: self.levels.iter().map(|l| l.nu).fold(0.0, f64::max),
            solver: Some("direct".into()),
        };
        let errs: Vec<f64> = self.levels.iter().map(|l| l.error_x).collect();
        let mut out = vec![
            BoundReport::evaluate("strang-inf", ctx.clone(), errs.clone(), self.levels.iter().map(|l| l.strang_inf).collect()),
            BoundReport::evaluate("strang", ctx.clone(), errs.clone(), self.levels.iter().map(|l| l.strang_line).collect()),
        ];
        if self.levels.iter().all(|l| l.cea.is_some()) {
            out.push(BoundReport::evaluate("cea", ctx, errs, self.levels.iter().map(|l| l.cea.unwrap()).collect()));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("modes,n,h,nu,error_x,best_approx,strang_inf,strang_line,cea\n");
        for l in &self.levels {
            let cea = l.cea.map(|c| format!("{c:.16e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{cea}",
                l.modes, l.n, l.h, l.nu, l.error_x, l.best_approx, l.strang_inf, l.strang_line
            );
        }
        s
    }
}

/// Minimizes a convex function on `[0, 1]` by golden-section search.
fn golden_min(f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    f(0.5 * (a + b)).min(f(0.0)).min(f(1.0))
}

/// Least-squares slope of `ys` against `xs`.
pub fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Strang study on the circle family (radius 1/2, `c0 = 1/2`) with mesh
/// parameter `h = 1/K`.
///
/// The operator is perturbed by dense random noise of level `ν` and the
/// right-hand side independently by the same level (seed `seed + 1`). The
/// reference solution is the analytic one truncated at 8× the finest
/// level. Because the X-Gram is diagonal, the infimum over `w` reduces to
/// `w = t·Πu` with `t ∈ [0, 1]` and is evaluated by a 1-D search.
pub fn strang_study(levels: &[usize], rule: NuRule, seed: u64) -> Result<StrangStudy, BoundsError> {
    if levels.is_empty() {
        return Err(BoundsError::InvalidSetup("no refinement levels".into()));
    }
    let finest = *levels.iter().max().unwrap();
    let reference_modes = 8 * finest;
    let (radius, c0) = (0.5, 0.5);
    let out: Result<Vec<StrangLevel>, BoundsError> = levels
        .par_iter()
        .map(|&modes| {
            let (problem, _) = circle_fourier(modes, radius, c0)?;
            let exact = problem.exact_coeffs.as_ref().ok_or(BoundsError::MissingExactSolution)?;
            let h = 1.0 / modes as f64;
            let nu = rule.level(h);
            let op = &problem.op;
            let x = op.domain();
            let (a_nu, b_nu) = if nu > 0.0 {
                let spec = PerturbationSpec::new(nu, PerturbationMode::DenseRandom, seed)?;
                (
                    perturb_operator(op, &spec)?.op,
                    perturb_rhs(&problem.rhs, op.range_dual(), nu, seed.wrapping_add(1))?,
                )
            } else {
                (op.clone(), problem.rhs.clone())
            };
            let u_h = LuFactors::new(a_nu.matrix())?.solve(&b_nu)?;
            let diff: Vec<Complex64> = exact.iter().zip(&u_h).map(|(u, v)| u - v).collect();
            let in_space = x.norm(&diff).map_err(ProblemError::from)?;
            let proj_norm = x.norm(exact).map_err(ProblemError::from)?;
            let tail: f64 = circle_modes(reference_modes)
                .into_iter()
                .filter(|k| k.unsigned_abs() as usize > modes)
                .map(|k| circle_weight(k) * circle_exact(k, c0).powi(2))
                .sum();
            let best = tail.sqrt();
            let error_x = (in_space * in_space + tail).sqrt();
            let k_a = op.cont_norm() / op.gamma();
            let b_dual = op.range_dual().dual_norm(&problem.rhs).map_err(ProblemError::from)?;
            let rhs_term = nu / (op.gamma() * (1.0 - nu)) * b_dual;
            let alpha = 1.0 + k_a / (1.0 - nu);
            let beta = nu / (1.0 - nu);
            let inf = golden_min(|t| alpha * (tail + (1.0 - t).powi(2) * proj_norm * proj_norm).sqrt() + beta * t * proj_norm);
            Ok(StrangLevel {
                modes,
                n: op.dim(),
                h,
                nu,
                error_x,
                best_approx: best,
                strang_inf: inf + rhs_term,
                strang_line: (1.0 + k_a) * alpha * best + 2.0 * rhs_term,
                cea: (nu == 0.0).then_some((1.0 + k_a) * best),
                k_a,
            })
        })
        .collect();
    let levels = out?;
    let order = if levels.len() >= 2 {
        let xs: Vec<f64> = levels.iter().map(|l| l.h.ln()).collect();
        let ys: Vec<f64> = levels.iter().map(|l| l.error_x.ln()).collect();
        regression_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    Ok(StrangStudy {
        rule,
        reference_modes,
        levels,
        order,
    })
}

/// Grid of a circle-family sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrid {
    pub mus: Vec<f64>,
    pub nus: Vec<f64>,
    pub modes: Vec<usize>,
    pub seed: u64,
    /// Restart length of the weighted GMRES check at each point.
    pub restart: Option<usize>,
}

impl SweepGrid {
    /// `{0, 0.1, …, 0.9}²` at a single resolution.
    pub fn decile(modes: usize, seed: u64) -> Self {
        let tenths: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        Self {
            mus: tenths.clone(),
            nus: tenths,
            modes: vec![modes],
            seed,
            restart: Some(10),
        }
    }

    fn points(&self) -> Vec<(usize, f64, f64)> {
        let mut pts = vec![];
        for &k in &self.modes {
            for &mu in &self.mus {
                for &nu in &self.nus {
                    pts.push((k, mu, nu));
                }
            }
        }
        pts
    }
}

/// `(modes, μ, ν, κ_S, K★,μ,ν)` of one sweep point.
pub type SweepRow = (usize, f64, f64, f64, f64);

/// Aggregated sweep output in grid order.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepResult {
    pub reports: Vec<BoundReport>,
    pub violations: usize,
    /// `max κ_S(PA)/min κ_S(PA)` over the unperturbed points.
    pub h_independence_ratio: Option<f64>,
    pub h_independent: Option<bool>,
    /// `(modes, μ, ν, κ_S, K★,μ,ν)` per point.
    pub table: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("modes,mu,nu,kappa_s,k_star_mu_nu\n");
        for (k, mu, nu, ks, kb) in &self.table {
            let _ = writeln!(s, "{k},{mu:.16e},{nu:.16e},{ks:.16e},{kb:.16e}");
        }
        s
    }
}

/// Maximum allowed `max/min` of `κ_S(PA)` across resolutions.
pub const H_INDEPENDENCE_RATIO: f64 = 1.05;

/// Runs the condition-bound checks and one weighted GMRES check at every
/// grid point of the circle family. Points run concurrently; results are
/// reassembled in grid order.
pub fn sweep(grid: &SweepGrid) -> Result<SweepResult, BoundsError> {
    if grid.mus.is_empty() || grid.nus.is_empty() || grid.modes.is_empty() {
        return Err(BoundsError::InvalidSetup("empty sweep grid".into()));
    }
    let bases: Result<Vec<(usize, PreconditionedSystem)>, BoundsError> = grid
        .modes
        .iter()
        .map(|&k| {
            let (p, pre) = circle_fourier(k, 0.5, 0.5)?;
            Ok((k, PreconditionedSystem::new(p, pre)?))
        })
        .collect();
    let bases = bases?;
    let per_point: Result<Vec<(Vec<BoundReport>, SweepRow)>, BoundsError> = grid
        .points()
        .par_iter()
        .map(|&(k, mu, nu)| {
            let base = &bases.iter().find(|(m, _)| *m == k).unwrap().1;
            let mu_spec = PerturbationSpec::new(mu, PerturbationMode::DenseRandom, grid.seed)?;
            let nu_spec = PerturbationSpec::new(nu, PerturbationMode::DenseRandom, grid.seed.wrapping_add(2))?;
            let sys = base.perturbed(&mu_spec, &nu_spec, nu, grid.seed.wrapping_add(3))?;
            let mut reps = check_condition_bounds(&sys)?;
            let mut cfg = SolveConfig::new(Method::WeightedGmres, crate::config::SOLVER_TOL, 4 * sys.dim());
            cfg.restart = grid.restart.map(|r| r.min(sys.dim()));
            reps.extend(check_gmres_linear(&sys, &cfg)?.reports);
            let cc = sys.condition_constants()?;
            Ok((reps, (k, mu, nu, cc.kappa_s, cc.k_star_mu_nu)))
        })
        .collect();
    let per_point = per_point?;
    let mut reports = vec![];
    let mut table = vec![];
    for (r, row) in per_point {
        reports.extend(r);
        table.push(row);
    }
    let violations = reports.iter().filter(|r| r.is_violation()).count();
    let unperturbed: Vec<f64> = table.iter().filter(|r| r.1 == 0.0 && r.2 == 0.0).map(|r| r.3).collect();
    let ratio = (grid.modes.len() > 1 && !unperturbed.is_empty()).then(|| {
        unperturbed.iter().cloned().fold(f64::MIN, f64::max) / unperturbed.iter().cloned().fold(f64::MAX, f64::min)
    });
    Ok(SweepResult {
        reports,
        violations,
        h_independence_ratio: ratio,
        h_independent: ratio.map(|r| r <= H_INDEPENDENCE_RATIO),
        table,
    })
}

/// Euclidean `σ_max/σ_min` of a matrix.
pub fn euclidean_condition(a: &ComplexMatrix) -> f64 {
    let sv = singular_values(a);
    sv[0] / sv[sv.len() - 1]
}

/// Singular values of the compact part in the discrete operator norm,
/// `σ_j(H_Y^{-1/2}KH_X^{-1/2})`.
pub fn operator_singular_values(sys: &PreconditionedSystem) -> Result<Vec<f64>, BoundsError> {
    let k = sys.problem.compact_part.as_ref().ok_or(BoundsError::MissingCompactPart)?;
    Ok(singular_values(&normalized_operator(k, sys.problem.op.domain(), sys.problem.op.range_dual())))
}

/// Condition-number bound factor `K★,μ,ν/K★`.
pub fn perturbation_inflation(mu: f64, nu: f64) -> f64 {
    bi_parametric_factor(mu, nu)
}
