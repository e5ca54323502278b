use biprecon::bounds::*;
use biprecon::densela::ComplexMatrix;
use biprecon::krylov::{Method, SolveConfig};
use biprecon::opprec::PreconditionedSystem;
use biprecon::perturb::{PerturbationMode, PerturbationSpec};
use biprecon::problems::*;
use biprecon::spaces::DiscreteSpace;
use num_complex::Complex64;
use std::sync::Arc;

fn identity_system(n: usize) -> PreconditionedSystem {
    let sp = Arc::new(DiscreteSpace::euclidean("E", n));
    let op = || GalerkinOperator::new(ComplexMatrix::identity(n), sp.clone(), sp.clone()).unwrap();
    let problem = ProblemInstance {
        op: op(),
        rhs: vec![Complex64::new(1.0, 0.0); n],
        family: Family::Custom,
        params: vec![],
        exact_coeffs: None,
        compact_part: None,
        carleman_index: None,
    };
    PreconditionedSystem::new(problem, PreconditionerSet::new(op(), op(), op(), true).unwrap()).unwrap()
}

fn circle(k: usize) -> PreconditionedSystem {
    let (p, pre) = circle_fourier(k, 0.5, 0.5).unwrap();
    PreconditionedSystem::new(p, pre).unwrap()
}

fn spec(level: f64, seed: u64) -> PerturbationSpec {
    PerturbationSpec::new(level, PerturbationMode::DenseRandom, seed).unwrap()
}

#[test]
fn identity_system_satisfies_everything() {
    let sys = identity_system(5);
    assert!(check_condition_bounds(&sys).unwrap().iter().all(|r| r.satisfied));
    let lc = check_gmres_linear(&sys, &SolveConfig::new(Method::WeightedGmres, 1e-12, 10)).unwrap();
    assert!(lc.reports.iter().all(|r| r.satisfied), "{:#?}", lc.reports);
    assert_eq!(lc.weighted.iterations, 1);
    let cg = check_cg_elliptic(&sys, &SolveConfig::new(Method::Cg, 1e-12, 10)).unwrap();
    assert_eq!(cg.history.a_norm_errors[1], 0.0);
}

#[test]
fn report_json_schema() {
    let sys = circle(4);
    let reps = check_condition_bounds(&sys).unwrap();
    let v: serde_json::Value = serde_json::from_str(&biprecon::json::to_string(&reps[0])).unwrap();
    for key in ["boundId", "context", "measured", "bound", "satisfied", "margin"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn tolerance_per_bound_id() {
    assert_eq!(tolerance("spectral-condition"), Tolerance::Absolute(1e-8));
    assert_eq!(tolerance("gmres-linear-weighted"), Tolerance::Relative(1e-10));
    assert_eq!(tolerance("gmres-fov-linear"), Tolerance::Absolute(1e-10));
}

#[test]
fn third_third_inflates_by_four() {
    let base = circle(8);
    let p = base.perturbed(&spec(1.0 / 3.0, 1), &spec(1.0 / 3.0, 2), 0.0, 3).unwrap();
    let cc = p.condition_constants().unwrap();
    assert!((cc.k_star_mu_nu / cc.k_star - 4.0).abs() < 1e-12);
    assert!((perturbation_inflation(1.0 / 3.0, 1.0 / 3.0) - 4.0).abs() < 1e-12);
    assert!(check_condition_bounds(&p).unwrap().iter().all(|r| r.satisfied));
}

#[test]
fn one_point_sweep_matches_individual_checks() {
    let grid = SweepGrid {
        mus: vec![0.2],
        nus: vec![0.1],
        modes: vec![6],
        seed: 11,
        restart: Some(5),
    };
    let s = sweep(&grid).unwrap();
    let sys = circle(6).perturbed(&spec(0.2, 11), &spec(0.1, 13), 0.1, 14).unwrap();
    let mut reps = check_condition_bounds(&sys).unwrap();
    let mut cfg = SolveConfig::new(Method::WeightedGmres, biprecon::config::SOLVER_TOL, 4 * sys.dim());
    cfg.restart = Some(5);
    reps.extend(check_gmres_linear(&sys, &cfg).unwrap().reports);
    assert_eq!(s.reports.len(), reps.len());
    for (a, b) in s.reports.iter().zip(&reps) {
        assert_eq!(a.bound_id, b.bound_id);
        assert_eq!(a.measured, b.measured);
        assert_eq!(a.bound, b.bound);
    }
    assert!(s.to_csv().lines().count() == 2);
}

#[test]
fn mu_row_monotone() {
    let grid = SweepGrid {
        mus: vec![0.0, 0.3, 0.6, 0.9],
        nus: vec![0.0],
        modes: vec![4],
        seed: 2,
        restart: Some(4),
    };
    let s = sweep(&grid).unwrap();
    assert!(s.table.windows(2).all(|w| w[1].4 > w[0].4));
    assert_eq!(s.violations, 0);
}

#[test]
fn h_independence_across_resolutions() {
    let grid = SweepGrid {
        mus: vec![0.0],
        nus: vec![0.0],
        modes: vec![4, 8, 16],
        seed: 1,
        restart: Some(4),
    };
    let s = sweep(&grid).unwrap();
    assert_eq!(s.h_independent, Some(true));
    assert!(s.h_independence_ratio.unwrap() <= H_INDEPENDENCE_RATIO);
}

#[test]
fn strang_error_monotone_without_perturbation() {
    let st = strang_study(&[4, 8, 16, 32], NuRule::Zero, 3).unwrap();
    assert!(st.levels.windows(2).all(|w| w[1].error_x <= w[0].error_x));
    assert!(st.reports().iter().all(|r| r.satisfied));
    assert_eq!(st.reports().len(), 3);
    assert!(st.to_csv().starts_with("modes,n,h,nu,"));
}

#[test]
fn strang_requires_levels() {
    assert!(strang_study(&[], NuRule::Zero, 0).is_err());
}

#[test]
fn superlinear_rejects_missing_compact_part() {
    let cfg = SolveConfig::new(Method::WeightedGmres, 1e-10, 40);
    assert!(matches!(check_gmres_superlinear(&circle(4), &cfg), Err(BoundsError::MissingCompactPart)));
}

#[test]
fn superlinear_runs_are_cross_checked() {
    let (p, pre) = fredholm_second_kind(24, 0.4).unwrap();
    let sys = PreconditionedSystem::new(p, pre).unwrap();
    let sc = check_gmres_superlinear(&sys, &SolveConfig::new(Method::WeightedGmres, 1e-10, 24)).unwrap();
    let ids: Vec<&str> = sc.reports.iter().map(|r| r.bound_id.as_str()).collect();
    assert!(ids.contains(&"cross-norm-euclidean") && ids.contains(&"cross-norm-weighted"));
    assert!(sc.reports.iter().all(|r| r.satisfied), "{:#?}", sc.reports);
}

#[test]
fn regression_slope_of_power_law() {
    let xs: Vec<f64> = (1..6).map(|i| (i as f64).ln()).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
    assert!((regression_slope(&xs, &ys) - 3.0).abs() < 1e-12);
}
