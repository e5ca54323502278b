//! Model problem families assembled as Galerkin data.
//!
//! * `circle_fourier`: hypersingular operator preconditioned by the single
//!   layer operator on the unit circle, diagonal in the Fourier basis.
//! * `fredholm_second_kind`: identity plus a smooth Gaussian kernel, P0
//!   elements on `[0, 1]`.
//! * `graded_mass`: P1 mass and H¹ Grams on a graded mesh.
//! * `random_demo`: `I + scale·E` with uniform `E`.

use crate::densela::{
    io::{fmt_f64, write_matrix_market, write_vector_csv},
    singular_values, cholesky_hpd, ComplexMatrix, ComplexVector, DenseError,
};
use crate::rng::Lcg64;
use crate::spaces::{normalized_operator, DiscreteSpace, SpaceError};
use num_complex::Complex64;
use serde::Serialize;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ProblemError {
    #[error("radius must lie in (0, 1), got {0}")]
    InvalidRadius(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("space chain mismatch: {0}")]
    SpaceMismatch(String),
    #[error("preconditioner inverse is not Hermitian positive definite: {0}")]
    NotHpd(DenseError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A matrix `A: X → Y'` with its spaces and discrete stability constants.
#[derive(Debug, Clone)]
pub struct GalerkinOperator {
    matrix: ComplexMatrix,
    domain: Arc<DiscreteSpace>,
    range_dual: Arc<DiscreteSpace>,
    gamma: f64,
    cont_norm: f64,
}

impl GalerkinOperator {
    /// Wraps a matrix and computes `γ = σ_min` and `‖a‖ = σ_max` of
    /// `H_Y^{-1/2}·A·H_X^{-1/2}`.
    pub fn new(
        matrix: ComplexMatrix,
        domain: Arc<DiscreteSpace>,
        range_dual: Arc<DiscreteSpace>,
    ) -> Result<Self, ProblemError> {
        let n = matrix.require_square()?;
        if domain.dim() != n || range_dual.dim() != n {
            return Err(ProblemError::SpaceMismatch(format!(
                "matrix of order {n} between spaces of dimension {} and {}",
                domain.dim(),
                range_dual.dim()
            )));
        }
        let (gamma, cont_norm) = discrete_constants(&matrix, &domain, &range_dual);
        Ok(Self {
            matrix,
            domain,
            range_dual,
            gamma,
            cont_norm,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn domain(&self) -> &Arc<DiscreteSpace> {
        &self.domain
    }

    pub fn range_dual(&self) -> &Arc<DiscreteSpace> {
        &self.range_dual
    }

    /// Discrete inf-sup constant.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Discrete continuity constant.
    pub fn cont_norm(&self) -> f64 {
        self.cont_norm
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Same spaces, new matrix, constants recomputed.
    pub fn with_matrix(&self, matrix: ComplexMatrix) -> Result<Self, ProblemError> {
        Self::new(matrix, self.domain.clone(), self.range_dual.clone())
    }
}

/// `(σ_min, σ_max)` of the normalized operator.
pub fn discrete_constants(a: &ComplexMatrix, domain: &DiscreteSpace, range_dual: &DiscreteSpace) -> (f64, f64) {
    if a.is_diagonal() && domain.gram().is_diagonal() && range_dual.gram().is_diagonal() {
        let vals: Vec<f64> = (0..a.rows())
            .map(|i| a[(i, i)].norm() / (domain.gram()[(i, i)].re * range_dual.gram()[(i, i)].re).sqrt())
            .collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        return (lo, hi);
    }
    let s = singular_values(&normalized_operator(a, domain, range_dual));
    (s.last().copied().unwrap_or(0.0), s.first().copied().unwrap_or(0.0))
}

/// Model family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Circle,
    Fredholm,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Circle => "circle",
            Family::Fredholm => "fredholm",
            Family::Custom => "custom",
        }
    }
}

/// Assembled system `A u = b` with optional reference data.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub op: GalerkinOperator,
    pub rhs: ComplexVector,
    pub family: Family,
    /// Named generator parameters, recorded in sidecars and reports.
    pub params: Vec<(String, f64)>,
    /// Reference solution coefficients.
    pub exact_coeffs: Option<ComplexVector>,
    /// `K = A − N` for second-kind problems.
    pub compact_part: Option<ComplexMatrix>,
    pub carleman_index: Option<f64>,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

/// The triple `(C, M, N)` realizing `P = M⁻¹CN⁻¹`.
///
/// Spaces: `C: V → W'`, `M: X → W'`, `N: V → Y'`.
#[derive(Debug, Clone)]
pub struct PreconditionerSet {
    pub c: GalerkinOperator,
    pub m: GalerkinOperator,
    pub n: GalerkinOperator,
    op_bg: bool,
    p_inverse: Option<Arc<DiscreteSpace>>,
}

impl PreconditionerSet {
    /// Checks the space chain. With `op_bg` set, also requires `V = W` and
    /// `N = Mᴴ`, validates `P⁻¹ = N·C⁻¹·M` as Hermitian positive definite
    /// and keeps it as a Gram for weighted solvers.
    pub fn new(
        c: GalerkinOperator,
        m: GalerkinOperator,
        n: GalerkinOperator,
        op_bg: bool,
    ) -> Result<Self, ProblemError> {
        let dim = c.dim();
        if m.dim() != dim || n.dim() != dim {
            return Err(ProblemError::SpaceMismatch("C, M, N differ in dimension".into()));
        }
        let chain = [
            (c.domain().label(), n.domain().label(), "C and N must share the domain V"),
            (c.range_dual().label(), m.range_dual().label(), "C and M must share the range W'"),
        ];
        for (a, b, msg) in chain {
            if a != b {
                return Err(ProblemError::SpaceMismatch(format!("{msg} ({a} vs {b})")));
            }
        }
        let p_inverse = if op_bg {
            if !c.domain().same_geometry(c.range_dual()) {
                return Err(ProblemError::SpaceMismatch("OP-BG requires V = W".into()));
            }
            let mh = m.matrix().adjoint();
            if n.matrix().sub(&mh).max_abs() > 1e-14 * mh.max_abs() {
                return Err(ProblemError::SpaceMismatch("OP-BG requires N = Mᴴ".into()));
            }
            let cinv_m = crate::densela::LuFactors::new(c.matrix())?.solve_matrix(m.matrix())?;
            let pinv = n.matrix().matmul(&cinv_m).hermitian_part();
            cholesky_hpd(&pinv).map_err(ProblemError::NotHpd)?;
            Some(Arc::new(DiscreteSpace::new("pinv", pinv)?))
        } else {
            None
        };
        Ok(Self {
            c,
            m,
            n,
            op_bg,
            p_inverse,
        })
    }

    pub fn op_bg(&self) -> bool {
        self.op_bg
    }

    /// `P⁻¹` as a Gram, present in the OP-BG configuration.
    pub fn p_inverse_gram(&self) -> Option<&Arc<DiscreteSpace>> {
        self.p_inverse.as_ref()
    }

    /// Replaces `C` (same spaces), revalidating the set.
    pub fn with_c(&self, c: GalerkinOperator) -> Result<Self, ProblemError> {
        Self::new(c, self.m.clone(), self.n.clone(), self.op_bg)
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }
}

/// Fourier mode numbers `−K..K`.
pub fn circle_modes(modes: usize) -> Vec<i64> {
    (-(modes as i64)..=modes as i64).collect()
}

/// Hypersingular symbol `max(|k|, c0)/2`.
pub fn hypersingular_symbol(k: i64, c0: f64) -> f64 {
    (k.unsigned_abs() as f64).max(c0) / 2.0
}

/// Single-layer symbol: `−r·log r` at `k = 0`, `r/(2|k|)` otherwise.
pub fn single_layer_symbol(k: i64, radius: f64) -> f64 {
    if k == 0 {
        -radius * radius.ln()
    } else {
        radius / (2.0 * k.unsigned_abs() as f64)
    }
}

/// Fourier coefficient of the smooth datum, `(1+k²)^{-2}`.
pub fn circle_datum(k: i64) -> f64 {
    let k2 = (k * k) as f64;
    1.0 / ((1.0 + k2) * (1.0 + k2))
}

/// Exact solution coefficient `b_k / w_k`.
pub fn circle_exact(k: i64, c0: f64) -> f64 {
    circle_datum(k) / hypersingular_symbol(k, c0)
}

/// Weight `(1+k²)^{1/2}` of the energy space of the hypersingular operator.
pub fn circle_weight(k: i64) -> f64 {
    (1.0 + (k * k) as f64).sqrt()
}

/// Circle family with `2K+1` Fourier modes.
///
/// `X = Y` carry the Gram `diag((1+k²)^{1/2})`, `V = W` the Gram
/// `diag((1+k²)^{-1/2})`, both pairings are identities and the set is
/// flagged OP-BG.
pub fn circle_fourier(modes: usize, radius: f64, c0: f64) -> Result<(ProblemInstance, PreconditionerSet), ProblemError> {
    if modes < 1 {
        return Err(ProblemError::InvalidParameter("modes must be at least 1".into()));
    }
    if !(radius > 0.0 && radius < 1.0) {
        return Err(ProblemError::InvalidRadius(radius));
    }
    if !(c0 > 0.0) {
        return Err(ProblemError::InvalidParameter(format!("stabilization c0 must be positive, got {c0}")));
    }
    let ks = circle_modes(modes);
    let n = ks.len();
    let x_gram: Vec<f64> = ks.iter().map(|&k| circle_weight(k)).collect();
    let v_gram: Vec<f64> = x_gram.iter().map(|w| 1.0 / w).collect();
    let x = Arc::new(DiscreteSpace::new("X", ComplexMatrix::from_real_diag(&x_gram))?.with_sobolev_order(0.5));
    let v = Arc::new(DiscreteSpace::new("V", ComplexMatrix::from_real_diag(&v_gram))?.with_sobolev_order(-0.5));
    let a_diag: Vec<f64> = ks.iter().map(|&k| hypersingular_symbol(k, c0)).collect();
    let c_diag: Vec<f64> = ks.iter().map(|&k| single_layer_symbol(k, radius)).collect();
    let a = GalerkinOperator::new(ComplexMatrix::from_real_diag(&a_diag), x.clone(), x.clone())?;
    let c = GalerkinOperator::new(ComplexMatrix::from_real_diag(&c_diag), v.clone(), v.clone())?;
    let m = GalerkinOperator::new(ComplexMatrix::identity(n), x.clone(), v.clone())?;
    let nn = GalerkinOperator::new(ComplexMatrix::identity(n), v.clone(), x.clone())?;
    let rhs: ComplexVector = ks.iter().map(|&k| Complex64::new(circle_datum(k), 0.0)).collect();
    let exact: ComplexVector = ks.iter().map(|&k| Complex64::new(circle_exact(k, c0), 0.0)).collect();
    let problem = ProblemInstance {
        op: a,
        rhs,
        family: Family::Circle,
        params: vec![("modes".into(), modes as f64), ("radius".into(), radius), ("c0".into(), c0)],
        exact_coeffs: Some(exact),
        compact_part: None,
        carleman_index: None,
    };
    let pre = PreconditionerSet::new(c, m, nn, true)?;
    Ok((problem, pre))
}

/// Second-kind Fredholm family on `[0, 1]` with P0 elements.
///
/// `A = mass + K` with `K_ij = h²·exp(−(s_i − s_j)²/w²)` at element
/// midpoints. All four spaces are L² with the mass Gram and
/// `C = M = N = mass`, so `P = N⁻¹`.
pub fn fredholm_second_kind(n: usize, kernel_width: f64) -> Result<(ProblemInstance, PreconditionerSet), ProblemError> {
    if n < 4 {
        return Err(ProblemError::InvalidParameter(format!("n must be at least 4, got {n}")));
    }
    if !(kernel_width > 0.0) {
        return Err(ProblemError::InvalidParameter(format!("kernel width must be positive, got {kernel_width}")));
    }
    let h = 1.0 / n as f64;
    let mass = ComplexMatrix::from_real_diag(&vec![h; n]);
    let mid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let k = ComplexMatrix::from_fn(n, n, |i, j| {
        let d = (mid[i] - mid[j]) / kernel_width;
        Complex64::new(h * h * (-d * d).exp(), 0.0)
    });
    let l2 = Arc::new(DiscreteSpace::new("L2", mass.clone())?.with_mesh(h, h).with_sobolev_order(0.0));
    let a = GalerkinOperator::new(mass.add(&k), l2.clone(), l2.clone())?;
    let c = GalerkinOperator::new(mass.clone(), l2.clone(), l2.clone())?;
    let m = GalerkinOperator::new(mass.clone(), l2.clone(), l2.clone())?;
    let nn = GalerkinOperator::new(mass, l2.clone(), l2)?;
    let problem = ProblemInstance {
        op: a,
        rhs: vec![Complex64::new(h, 0.0); n],
        family: Family::Fredholm,
        params: vec![("n".into(), n as f64), ("kernel_width".into(), kernel_width)],
        exact_coeffs: None,
        compact_part: Some(k),
        carleman_index: Some(2.0),
    };
    let pre = PreconditionerSet::new(c, m, nn, true)?;
    Ok((problem, pre))
}

/// Nodes `(i/n)^grading`, `i = 0..n`.
pub fn graded_nodes(n: usize, grading: f64) -> Vec<f64> {
    (0..=n).map(|i| (i as f64 / n as f64).powf(grading)).collect()
}

/// P1 mass (L²) and mass-plus-stiffness (H¹) Grams on a graded mesh of
/// `[0, 1]`, assembled element by element in closed form.
pub fn graded_mass(n: usize, grading: f64) -> Result<(DiscreteSpace, DiscreteSpace), ProblemError> {
    if n < 2 {
        return Err(ProblemError::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if !(grading >= 1.0) {
        return Err(ProblemError::InvalidParameter(format!("grading must be at least 1, got {grading}")));
    }
    let x = graded_nodes(n, grading);
    let mut mass = ComplexMatrix::zeros(n + 1, n + 1);
    let mut stiff = ComplexMatrix::zeros(n + 1, n + 1);
    let mut h_min = f64::INFINITY;
    let mut h_max: f64 = 0.0;
    for e in 0..n {
        let h = x[e + 1] - x[e];
        h_min = h_min.min(h);
        h_max = h_max.max(h);
        let me = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
        let ke = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
        for a in 0..2 {
            for b in 0..2 {
                mass[(e + a, e + b)] += Complex64::new(me[a][b], 0.0);
                stiff[(e + a, e + b)] += Complex64::new(ke[a][b], 0.0);
            }
        }
    }
    let h1 = mass.add(&stiff);
    let l2 = DiscreteSpace::new("L2", mass)?.with_mesh(h_min, h_max).with_sobolev_order(0.0);
    let h1 = DiscreteSpace::new("H1", h1)?.with_mesh(h_min, h_max).with_sobolev_order(1.0);
    Ok((l2, h1))
}

/// `I + scale·E` with `E_ij` uniform on `[0, 1)` drawn row by row from
/// [`Lcg64`] seeded with `seed`.
pub fn random_demo(n: usize, scale: f64, seed: u64) -> Result<ComplexMatrix, ProblemError> {
    if n < 2 {
        return Err(ProblemError::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let mut g = Lcg64::new(seed);
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        let e = g.uniform();
        Complex64::new(if i == j { 1.0 } else { 0.0 } + scale * e, 0.0)
    }))
}

#[derive(Serialize)]
struct OperatorSidecar {
    name: &'static str,
    domain: String,
    range_dual: String,
    gamma: f64,
    cont_norm: f64,
}

#[derive(Serialize)]
struct Sidecar {
    family: &'static str,
    label: &'static str,
    dim: usize,
    parameters: std::collections::BTreeMap<String, f64>,
    operators: Vec<OperatorSidecar>,
    op_bg: bool,
    carleman_index: Option<f64>,
}

fn op_sidecar(name: &'static str, op: &GalerkinOperator) -> OperatorSidecar {
    OperatorSidecar {
        name,
        domain: op.domain().label().to_string(),
        range_dual: op.range_dual().label().to_string(),
        gamma: op.gamma(),
        cont_norm: op.cont_norm(),
    }
}

/// JSON sidecar describing a generated problem.
pub fn sidecar_json(problem: &ProblemInstance, pre: &PreconditionerSet) -> String {
    let sidecar = Sidecar {
        family: problem.family.name(),
        label: "model problem chosen for this laboratory",
        dim: problem.dim(),
        parameters: problem.params.iter().cloned().collect(),
        operators: vec![
            op_sidecar("A", &problem.op),
            op_sidecar("C", &pre.c),
            op_sidecar("M", &pre.m),
            op_sidecar("N", &pre.n),
        ],
        op_bg: pre.op_bg(),
        carleman_index: problem.carleman_index,
    };
    crate::json::to_string(&sidecar)
}

/// Writes the matrices, Grams, right-hand side and sidecar into `dir`.
pub fn dump(dir: &Path, problem: &ProblemInstance, pre: &PreconditionerSet) -> Result<(), ProblemError> {
    std::fs::create_dir_all(dir).map_err(DenseError::from)?;
    write_matrix_market(&dir.join("A.mtx"), problem.op.matrix())?;
    write_matrix_market(&dir.join("C.mtx"), pre.c.matrix())?;
    write_matrix_market(&dir.join("M.mtx"), pre.m.matrix())?;
    write_matrix_market(&dir.join("N.mtx"), pre.n.matrix())?;
    write_matrix_market(&dir.join("gram_X.mtx"), problem.op.domain().gram())?;
    write_matrix_market(&dir.join("gram_Y.mtx"), problem.op.range_dual().gram())?;
    write_matrix_market(&dir.join("gram_V.mtx"), pre.c.domain().gram())?;
    write_matrix_market(&dir.join("gram_W.mtx"), pre.c.range_dual().gram())?;
    if let Some(k) = &problem.compact_part {
        write_matrix_market(&dir.join("K.mtx"), k)?;
    }
    write_vector_csv(&dir.join("rhs.csv"), &problem.rhs)?;
    if let Some(u) = &problem.exact_coeffs {
        write_vector_csv(&dir.join("exact.csv"), u)?;
    }
    std::fs::write(dir.join("problem.json"), sidecar_json(problem, pre)).map_err(DenseError::from)?;
    Ok(())
}

/// One-line human summary used by the command-line tool.
pub fn summary(problem: &ProblemInstance) -> String {
    format!(
        "{} N={} gamma_A={} norm_a={}",
        problem.family.name(),
        problem.dim(),
        fmt_f64(problem.op.gamma()),
        fmt_f64(problem.op.cont_norm())
    )
}
