//! `biprecon` command-line tool.
//!
//! Exit codes: 0 success, 1 a checked bound was violated, 2 usage error,
//! 3 numeric failure (the originating error is printed verbatim).

use biprecon::bounds::{self, BoundReport, NuRule, SweepGrid};
use biprecon::densela::io::{vector_csv_string, write_matrix_market};
use biprecon::densela::ComplexMatrix;
use biprecon::fov::{carleman_diagnostics, coercivity_check, field_of_values_default};
use biprecon::krylov::{cg_solve, gmres_solve, Method, SolveConfig};
use biprecon::opprec::PreconditionedSystem;
use biprecon::perturb::{PerturbationMode, PerturbationSpec};
use biprecon::problems::{self, circle_fourier, fredholm_second_kind};
use biprecon::spaces::DiscreteSpace;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "biprecon", version, about = "Bi-parametric operator preconditioning laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a model problem and its preconditioner triple (C, M, N) as
    /// Matrix Market files plus a JSON sidecar.
    Assemble(ProblemArgs),
    /// Build the (h,ν)-perturbations C_μ, A_ν and b_ν and report their
    /// measured size; exercises the discrete inf-sup stability of perturbed
    /// forms.
    Perturb(ProblemArgs),
    /// Solve P_μA_ν u = P_μb_ν with GMRES, weighted GMRES or preconditioned CG
    /// and write the residual or error history.
    Solve(SolveArgs),
    /// Field of values of P_μA_ν (or its inverse) in the chosen geometry:
    /// the distance to the origin driving the Elman-type GMRES estimate.
    Fov(FovArgs),
    /// Singular values, partial means and Carleman norm of the compact part
    /// behind the super-linear GMRES estimate.
    Carleman(CarlemanArgs),
    /// Check the condition-number estimates for operator preconditioning,
    /// their bi-parametric extension, the linear or super-linear GMRES
    /// estimates and the elliptic CG estimate on one instance.
    Verify(SolveArgs),
    /// Bi-parametric sweep over μ and ν on the circle family: condition
    /// estimates with the (1+μ)/(1−μ)·(1+ν)/(1−ν) factor and weighted
    /// GMRES(m) checks at every grid point.
    Sweep(SweepArgs),
    /// First Strang lemma and Céa lemma study under refinement on the circle
    /// family with an analytic reference solution.
    Strang(StrangArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Circle,
    Fredholm,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightArg {
    XGram,
    Pinv,
    Euclid,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "circle")]
    family: FamilyArg,
    /// Fourier modes K for the circle (N = 2K+1) or elements n for Fredholm.
    #[arg(long, visible_alias = "n")]
    modes: Option<usize>,
    /// Circle radius.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// Stabilization of the hypersingular zero mode.
    #[arg(long, default_value_t = 0.5)]
    c0: f64,
    /// Fredholm kernel width.
    #[arg(long, default_value_t = 0.5)]
    width: f64,
    /// Perturbation level of the preconditioner C.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// Perturbation level of the operator A.
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    /// Perturbation level of the right-hand side (defaults to --nu).
    #[arg(long)]
    nu_rhs: Option<f64>,
    /// Perturbation mode: dense-random, svd-truncation or entry-drop.
    #[arg(long, default_value = "dense-random")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory; JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// gmres, weightedGmres or cg.
    #[arg(long, default_value = "weightedGmres")]
    method: String,
    /// GMRES restart length m; full GMRES when absent.
    #[arg(long)]
    restart: Option<usize>,
    #[arg(long, value_enum, default_value = "x-gram")]
    weight: WeightArg,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap; defaults to 4N.
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args, Clone)]
struct FovArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "x-gram")]
    weight: WeightArg,
    /// Use (P_μA_ν)⁻¹ instead of P_μA_ν.
    #[arg(long)]
    inverse: bool,
}

#[derive(Args, Clone)]
struct CarlemanArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Carleman index p; the family's index when absent.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Comma-separated circle mode counts.
    #[arg(long, value_delimiter = ',', default_value = "32")]
    modes: Vec<usize>,
    /// `decile` for {0,0.1,…,0.9}², or `MUS/NUS` with comma-separated levels.
    #[arg(long, default_value = "decile")]
    grid: String,
    #[arg(long, default_value_t = 10)]
    restart: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; all available cores when absent.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct StrangArgs {
    /// Comma-separated refinement levels (circle mode counts).
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128")]
    levels: Vec<usize>,
    /// `zero`, `fixed:NU` or `power:C,R` for ν = C·h^R.
    #[arg(long, default_value = "zero")]
    nu_rule: String,
    #[arg(long, default_value_t = 5)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

fn numeric<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Numeric(e.to_string())
}

type Run = Result<bool, Failure>;

fn check_level(name: &str, x: f64) -> Result<(), Failure> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{name} must lie in [0,1)")))
    }
}

fn build(args: &ProblemArgs) -> Result<PreconditionedSystem, Failure> {
    check_level("mu", args.mu)?;
    check_level("nu", args.nu)?;
    let nu_rhs = args.nu_rhs.unwrap_or(args.nu);
    check_level("nu-rhs", nu_rhs)?;
    let mode: PerturbationMode = args.mode.parse().map_err(Failure::Usage)?;
    let (p, pre) = match args.family {
        FamilyArg::Circle => circle_fourier(args.modes.unwrap_or(32), args.radius, args.c0),
        FamilyArg::Fredholm => fredholm_second_kind(args.modes.unwrap_or(64), args.width),
    }
    // generators only fail on parameter checks
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let sys = PreconditionedSystem::new(p, pre).map_err(numeric)?;
    if args.mu == 0.0 && args.nu == 0.0 && nu_rhs == 0.0 {
        return Ok(sys);
    }
    let mu = PerturbationSpec::new(args.mu, mode, args.seed).map_err(numeric)?;
    let nu = PerturbationSpec::new(args.nu, mode, args.seed.wrapping_add(1)).map_err(numeric)?;
    sys.perturbed(&mu, &nu, nu_rhs, args.seed.wrapping_add(2)).map_err(numeric)
}

fn weight_space(sys: &PreconditionedSystem, w: WeightArg) -> Result<Arc<DiscreteSpace>, Failure> {
    match w {
        WeightArg::XGram => Ok(sys.x_space().clone()),
        WeightArg::Euclid => Ok(Arc::new(DiscreteSpace::euclidean("euclid", sys.dim()))),
        WeightArg::Pinv => sys
            .precond
            .p_inverse_gram()
            .cloned()
            .ok_or_else(|| Failure::Usage("--weight pinv needs an unperturbed OP-BG configuration".into())),
    }
}

fn solve_config(sys: &PreconditionedSystem, args: &SolveArgs) -> Result<SolveConfig, Failure> {
    let method: Method = args.method.parse().map_err(|e: biprecon::krylov::KrylovError| Failure::Usage(e.to_string()))?;
    let mut cfg = SolveConfig::new(method, args.tol, args.max_iter.unwrap_or(4 * sys.dim()));
    cfg.restart = args.restart;
    if method == Method::WeightedGmres {
        cfg.weight = Some(weight_space(sys, args.weight)?);
    }
    cfg.validate(sys.dim()).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Prints to stdout, ignoring a closed pipe.
fn print_out(content: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{content}");
}

/// Writes `name` into `out`, or prints it when no directory was given and
/// `to_stdout` is set.
fn emit(out: Option<&Path>, name: &str, content: &str, to_stdout: bool) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(numeric)?;
            std::fs::write(dir.join(name), content).map_err(numeric)
        }
        None => {
            if to_stdout {
                print_out(content);
            }
            Ok(())
        }
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Failure::Usage("jobs must be at least 1".into())),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(j).build().map_err(numeric)?;
            Ok(pool.install(f))
        }
    }
}

fn assemble(args: &ProblemArgs) -> Run {
    let sys = build(args)?;
    let sidecar = problems::sidecar_json(&sys.problem, &sys.precond);
    match &args.out {
        Some(dir) => problems::dump(dir, &sys.problem, &sys.precond).map_err(numeric)?,
        None => print_out(&sidecar),
    }
    eprintln!("{}", problems::summary(&sys.problem));
    Ok(true)
}

fn perturb(args: &ProblemArgs) -> Run {
    let sys = build(args)?;
    let report = json!({
        "family": sys.problem.family.name(),
        "mu": sys.mu,
        "nu": sys.nu,
        "nuRhs": sys.nu_rhs,
        "mode": args.mode,
        "seed": args.seed,
        "measured": sys.applied_perturbations(),
        "gammaA": sys.problem.op.gamma(),
        "normA": sys.problem.op.cont_norm(),
        "gammaC": sys.precond.c.gamma(),
        "normC": sys.precond.c.cont_norm(),
        "base": sys.base_constants(),
    });
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(numeric)?;
        write_matrix_market(&dir.join("A_nu.mtx"), sys.problem.op.matrix()).map_err(numeric)?;
        write_matrix_market(&dir.join("C_mu.mtx"), sys.precond.c.matrix()).map_err(numeric)?;
        std::fs::write(dir.join("rhs_nu.csv"), vector_csv_string(&sys.problem.rhs)).map_err(numeric)?;
    }
    emit(args.out.as_deref(), "perturbation.json", &biprecon::json::to_string(&report), true)?;
    Ok(true)
}

fn solve(args: &SolveArgs) -> Run {
    let sys = build(&args.problem)?;
    let cfg = solve_config(&sys, args)?;
    let out = args.problem.out.as_deref();
    let (x, summary, csv) = if cfg.method == Method::Cg {
        let (x, h) = cg_solve(&sys, &cfg).map_err(numeric)?;
        let s = json!({"method": "cg", "converged": h.converged, "iterations": h.iterations, "history": h});
        (x, s, h.to_csv(None))
    } else {
        let (x, h) = gmres_solve(&sys, &cfg).map_err(numeric)?;
        let s = json!({"method": args.method, "converged": h.converged, "iterations": h.iterations, "history": h});
        (x, s, h.to_csv(None))
    };
    emit(out, "history.csv", &csv, false)?;
    emit(out, "solution.csv", &vector_csv_string(&x), false)?;
    emit(out, "solve.json", &biprecon::json::to_string(&summary), true)?;
    Ok(true)
}

fn fov(args: &FovArgs) -> Run {
    let sys = build(&args.problem)?;
    let gram = weight_space(&sys, args.weight)?;
    let q: ComplexMatrix = if args.inverse {
        sys.explicit_pa_inverse().map_err(numeric)?
    } else {
        sys.explicit_pa().map_err(numeric)?
    };
    let f = field_of_values_default(&q, gram.gram()).map_err(numeric)?;
    let co = coercivity_check(&q, gram.gram()).map_err(numeric)?;
    let summary = json!({
        "inverse": args.inverse,
        "vH": f.v_h,
        "containsZero": f.contains_zero,
        "nearestAngle": f.nearest_angle,
        "coercivity": co,
    });
    emit(args.problem.out.as_deref(), "fov.csv", &f.to_csv(), false)?;
    emit(args.problem.out.as_deref(), "fov.json", &biprecon::json::to_string(&summary), true)?;
    Ok(true)
}

fn carleman(args: &CarlemanArgs) -> Run {
    let sys = build(&args.problem)?;
    if sys.problem.compact_part.is_none() {
        return Err(Failure::Usage("carleman needs a family with a compact part (fredholm)".into()));
    }
    let p = args.p.or(sys.problem.carleman_index).unwrap_or(0.0);
    let k = sys.chain_compact_part().map_err(numeric)?;
    let d = carleman_diagnostics(&k, sys.precond.m.matrix(), sys.x_space().gram(), p).map_err(numeric)?;
    emit(args.problem.out.as_deref(), "carleman.json", &biprecon::json::to_string(&d), true)?;
    Ok(true)
}

fn verify(args: &SolveArgs) -> Run {
    let sys = build(&args.problem)?;
    let mut cfg = solve_config(&sys, args)?;
    let mut reports: Vec<BoundReport> = bounds::check_condition_bounds(&sys).map_err(numeric)?;
    if sys.problem.compact_part.is_some() {
        cfg.restart = None;
        reports.extend(bounds::check_gmres_superlinear(&sys, &cfg).map_err(numeric)?.reports);
    } else {
        if cfg.restart.is_none() && args.restart.is_none() {
            cfg.restart = Some(10.min(sys.dim()));
        }
        reports.extend(bounds::check_gmres_linear(&sys, &cfg).map_err(numeric)?.reports);
    }
    // CG needs a Hermitian positive definite chain, so only the unperturbed
    // OP-BG configuration is checked.
    if sys.precond.op_bg() && sys.applied_perturbations().is_none() {
        let cg_cfg = SolveConfig::new(Method::Cg, args.tol, cfg.max_iter);
        reports.extend(bounds::check_cg_elliptic(&sys, &cg_cfg).map_err(numeric)?.reports);
    }
    let violations = reports.iter().filter(|r| r.is_violation()).count();
    let doc = json!({
        "family": sys.problem.family.name(),
        "n": sys.dim(),
        "mu": sys.mu,
        "nu": sys.nu,
        "violations": violations,
        "reports": reports,
    });
    emit(args.problem.out.as_deref(), "verify.json", &biprecon::json::to_string(&doc), true)?;
    Ok(violations == 0)
}

fn parse_levels(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            let x: f64 = t.trim().parse().map_err(|_| Failure::Usage(format!("bad level '{t}' in --grid")))?;
            check_level("grid level", x)?;
            Ok(x)
        })
        .collect()
}

fn sweep(args: &SweepArgs) -> Run {
    if args.modes.is_empty() || args.modes.contains(&0) {
        return Err(Failure::Usage("modes must be positive".into()));
    }
    let (mus, nus) = if args.grid == "decile" {
        let g = SweepGrid::decile(1, 0);
        (g.mus, g.nus)
    } else {
        let (m, n) = args
            .grid
            .split_once('/')
            .ok_or_else(|| Failure::Usage("--grid must be 'decile' or 'MUS/NUS'".into()))?;
        (parse_levels(m)?, parse_levels(n)?)
    };
    if args.restart == 0 {
        return Err(Failure::Usage("restart must be at least 1".into()));
    }
    let grid = SweepGrid {
        mus,
        nus,
        modes: args.modes.clone(),
        seed: args.seed,
        restart: Some(args.restart),
    };
    let res = with_jobs(args.jobs, || bounds::sweep(&grid))?.map_err(numeric)?;
    emit(args.out.as_deref(), "sweep.csv", &res.to_csv(), false)?;
    emit(args.out.as_deref(), "sweep.json", &biprecon::json::to_string(&res), true)?;
    eprintln!("{} reports, {} violations", res.reports.len(), res.violations);
    Ok(res.violations == 0)
}

fn parse_rule(s: &str) -> Result<NuRule, Failure> {
    let bad = || Failure::Usage(format!("unknown --nu-rule '{s}' (zero, fixed:NU, power:C,R)"));
    if s == "zero" {
        return Ok(NuRule::Zero);
    }
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "fixed" => {
            let nu: f64 = rest.parse().map_err(|_| bad())?;
            check_level("nu", nu)?;
            Ok(NuRule::Fixed { nu })
        }
        "power" => {
            let (c, r) = rest.split_once(',').ok_or_else(bad)?;
            let c: f64 = c.parse().map_err(|_| bad())?;
            let r: f64 = r.parse().map_err(|_| bad())?;
            if !(c >= 0.0 && r >= 0.0) {
                return Err(bad());
            }
            Ok(NuRule::Power { c, r })
        }
        _ => Err(bad()),
    }
}

fn strang(args: &StrangArgs) -> Run {
    let rule = parse_rule(&args.nu_rule)?;
    if args.levels.is_empty() || args.levels.contains(&0) {
        return Err(Failure::Usage("levels must be positive".into()));
    }
    let st = with_jobs(args.jobs, || bounds::strang_study(&args.levels, rule, args.seed))?.map_err(numeric)?;
    let reports = st.reports();
    let violations = reports.iter().filter(|r| r.is_violation()).count();
    let doc = json!({"study": st, "reports": reports, "violations": violations});
    emit(args.out.as_deref(), "strang.csv", &st.to_csv(), false)?;
    emit(args.out.as_deref(), "strang.json", &biprecon::json::to_string(&doc), true)?;
    Ok(violations == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Assemble(a) => assemble(a),
        Command::Perturb(a) => perturb(a),
        Command::Solve(a) => solve(a),
        Command::Fov(a) => fov(a),
        Command::Carleman(a) => carleman(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
        Command::Strang(a) => strang(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("bound violation detected");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: biprecon <assemble|perturb|solve|fov|carleman|verify|sweep|strang> [OPTIONS]; see --help");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
