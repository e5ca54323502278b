//! Iteration caps, tolerances and generator constants used across the crate.
//!
//! Every numerical threshold lives here so that experiments are reproducible
//! and tolerances can be audited in one place.

/// Relative tolerance for the Hermitian symmetry check on eigen input.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Maximum number of cyclic Jacobi sweeps (Hermitian eigen and SVD).
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Off-diagonal threshold, relative to the Frobenius norm, ending Jacobi sweeps.
pub const JACOBI_TOL: f64 = 1e-15;

/// Iteration cap per eigenvalue for the shifted Hessenberg QR iteration.
pub const QR_ITERS_PER_EIGENVALUE: usize = 60;

/// Iteration cap for the implicit QL iteration on real tridiagonal matrices.
pub const TRIDIAG_MAX_ITERS: usize = 60;

/// Relative singularity threshold for LU pivots.
pub const LU_PIVOT_TOL: f64 = 1e-14;

/// Loss of orthogonality triggering a second Gram-Schmidt pass.
pub const REORTH_TOL: f64 = 1e-8;

/// Relative Arnoldi norm treated as a happy breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-14;

/// Number of uniform angles sampled by the field-of-values routine.
pub const FOV_SAMPLES: usize = 720;

/// Stop golden-section refinement of the distance to the origin below this change.
pub const FOV_REFINE_TOL: f64 = 1e-8;

/// Iteration cap for the golden-section refinement.
pub const FOV_REFINE_MAX_ITERS: usize = 200;

/// Relative tolerance for the H-normality test.
pub const H_NORMAL_TOL: f64 = 1e-10;

/// Cross-product tolerance for convexity of the sampled FoV boundary.
pub const CONVEXITY_TOL: f64 = 1e-10;

/// Absolute tolerance applied to condition-number bounds.
pub const CONDITION_BOUND_TOL: f64 = 1e-8;

/// Relative tolerance applied to residual-rate bounds.
pub const RATE_BOUND_TOL: f64 = 1e-10;

/// Absolute tolerance applied to the FoV residual-ratio bound.
pub const FOV_RATIO_TOL: f64 = 1e-10;

/// Absolute slack (relative to the initial residual) for cross-norm residual checks.
pub const CROSS_NORM_TOL: f64 = 1e-10;

/// Multiplier of the 64-bit linear congruential generator (Knuth, MMIX).
pub const LCG_MULTIPLIER: u64 = 6_364_136_223_846_793_005;

/// Increment of the 64-bit linear congruential generator (Knuth, MMIX).
pub const LCG_INCREMENT: u64 = 1_442_695_040_888_963_407;

/// Default stopping tolerance for Krylov runs inside bound checks.
pub const SOLVER_TOL: f64 = 1e-10;

/// Hard cap on dense matrix dimension.
pub const MAX_DIM: usize = 1024;
