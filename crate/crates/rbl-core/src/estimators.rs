//! Pose estimators for the whitened range models.
//!
//! Five joint position-and-orientation estimators operate on the models
//! from [`crate::measurement`]:
//!
//! - `ls` — unconstrained least squares on the vectorized model; the
//!   rotation block of the solution is generally *not* orthonormal.
//! - `suc-ls` — the centered model is left-multiplied by `Ā†`, reducing
//!   rotation estimation to an orthogonal Procrustes problem with the
//!   closed-form SVD solution `Q̂ = V Uᵀ`.
//! - `ouc-ls` — keeps `Ā` in place (pseudo-inverting it would color the
//!   noise) and minimizes `‖(C̄ᵀ⊗Ā) vec(Q) - d̃‖` over orthonormal `Q`
//!   with Newton iterations on the rotation manifold.
//! - `suc-tls` / `ouc-tls` — total-least-squares variants that account
//!   for perturbations of the known topology. SUC-TLS provably equals
//!   SUC-LS; OUC-TLS is OUC-LS weighted by `Λ^{-1/2}` with
//!   `Λ = ĀĀᵀ + I`.
//!
//! Classical per-sensor localization (`Ŝ = Ā†D̄`, no topology knowledge)
//! and topology-aware localization (`Ŝ = Q̂C + t̂1ᵀ`) round out the set.
//!
//! The `wopp_*` functions expose the pieces of the Newton solver
//! (residual, Jacobian, Hessian, step, line search, initializer) for the
//! weighted orthogonal Procrustes problem; each carries its own testable
//! contract.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};

use crate::error::Error;
use crate::geometry::{nearest_orthogonal, rotation_exp, RotationMatrix};
use crate::measurement::{CenteredModel, WhitenedModel};
use crate::Result;

/// Estimator tags for [`PoseEstimate::method`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Unconstrained least squares.
    Ls,
    /// Simplified unitarily constrained LS (closed-form Procrustes).
    SucLs,
    /// Optimal unitarily constrained LS (Newton iterations).
    OucLs,
    /// Simplified unitarily constrained total least squares.
    SucTls,
    /// Optimal unitarily constrained total least squares.
    OucTls,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::SucLs => "suc-ls",
            Method::OucLs => "ouc-ls",
            Method::SucTls => "suc-tls",
            Method::OucTls => "ouc-tls",
        }
    }
}

/// A joint rotation/translation estimate.
///
/// `rotation` is orthonormal (to ~1e-10) for every method except
/// [`Method::Ls`], which carries no such guarantee.
#[derive(Debug, Clone)]
pub struct PoseEstimate {
    pub rotation: Matrix3<f64>,
    /// Meters.
    pub translation: Vector3<f64>,
    pub method: Method,
    /// Newton iterations spent; 0 for closed-form estimators.
    pub iterations: usize,
    /// False when the iteration cap was hit before the stopping rule.
    pub converged: bool,
    /// True when the Newton initializer fell back to the identity.
    pub init_fallback: bool,
}

impl PoseEstimate {
    /// Determinant of the rotation block; −1 indicates a reflection.
    pub fn det(&self) -> f64 {
        self.rotation.determinant()
    }
}

/// Knobs for the Newton solver.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSettings {
    /// Stopping threshold on the normalized gradient
    /// `‖Jᵀ(f(Q)-b)‖ / (‖J‖_F ‖f(Q)-b‖)`.
    pub epsilon: f64,
    /// Iteration cap; estimates that hit it are flagged unconverged.
    pub max_iterations: usize,
    /// Grid points of the coarse step-length search on (0, 1]; a
    /// golden-section refinement of the same size follows.
    pub linesearch_grid: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iterations: 50,
            linesearch_grid: 20,
        }
    }
}

/// The weighted orthogonal Procrustes problem
/// `min ‖(C̄ᵀ ⊗ A_w) vec(Q) - b‖₂  s.t.  QᵀQ = I`.
///
/// For the solver to be well posed, `aw` must have full column rank and
/// `cbar` full row rank; [`solve`](Self::solve) checks both.
#[derive(Debug, Clone)]
pub struct WoppProblem {
    /// Weighted design, (M−1)×3: `Ā` for OUC-LS, `Λ^{-1/2}Ā` for OUC-TLS.
    pub aw: DMatrix<f64>,
    /// Centered topology, 3×(N−1).
    pub cbar: DMatrix<f64>,
    /// Target, length (M−1)(N−1).
    pub b: DVector<f64>,
}

impl WoppProblem {
    pub fn new(aw: DMatrix<f64>, cbar: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if aw.ncols() != 3 || cbar.nrows() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "WOPP design must be k×3 and topology 3×n, got {:?} and {:?}",
                aw.shape(),
                cbar.shape()
            )));
        }
        if b.len() != aw.nrows() * cbar.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "WOPP target has length {}, expected {}",
                b.len(),
                aw.nrows() * cbar.ncols()
            )));
        }
        Ok(Self { aw, cbar, b })
    }

    /// `f(Q) = vec(A_w Q C̄)`, evaluated without forming the Kronecker
    /// product. `q` need not be orthonormal; `f` is linear.
    fn f(&self, q: &Matrix3<f64>) -> DVector<f64> {
        let prod = &self.aw * q * &self.cbar;
        DVector::from_column_slice(prod.as_slice())
    }

    fn rank_check(&self) -> Result<()> {
        let sv_a = self.aw.clone().svd(false, false).singular_values;
        if sv_a.min() <= 1e-10 * sv_a.max().max(1.0) {
            return Err(Error::RankDeficient {
                what: "WOPP design matrix",
                sigma_min: sv_a.min(),
            });
        }
        let sv_c = self.cbar.clone().svd(false, false).singular_values;
        if sv_c.min() <= 1e-10 * sv_c.max().max(1.0) {
            return Err(Error::RankDeficient {
                what: "centered topology",
                sigma_min: sv_c.min(),
            });
        }
        Ok(())
    }

    /// Run the Newton solver (initializer, steps, line searches) to
    /// convergence or the iteration cap.
    pub fn solve(&self, settings: &NewtonSettings) -> Result<WoppSolution> {
        self.rank_check()?;
        let (mut q, init_fallback) = wopp_init(self);
        let scale = self.b.norm().max(1.0);
        let mut iterations = 0;
        let mut converged = false;
        loop {
            let w = wopp_residual(self, q.matrix());
            let wnorm = w.norm();
            if wnorm <= 1e-12 * scale {
                // Residual vanished: consistent system solved exactly.
                converged = true;
                break;
            }
            let jac = wopp_jacobian(self, &q);
            let eps = (jac.transpose() * &w).norm() / (jac.norm() * wnorm);
            if eps <= settings.epsilon {
                converged = true;
                break;
            }
            if iterations >= settings.max_iterations {
                break;
            }
            let h = wopp_hessian(self, &q, &w);
            let (x, _) = step_from_parts(&jac, &w, &h)?;
            let gamma = wopp_linesearch(self, &q, &x, settings);
            q = q * rotation_exp(&(x * gamma));
            iterations += 1;
        }
        Ok(WoppSolution {
            rotation: q,
            iterations,
            converged,
            init_fallback,
        })
    }
}

/// Output of [`WoppProblem::solve`].
#[derive(Debug, Clone)]
pub struct WoppSolution {
    pub rotation: RotationMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub init_fallback: bool,
}

/// Which branch produced a search direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// Full Newton step; taken when `JᵀJ + H ≻ 0`.
    Newton,
    /// Gauss-Newton fallback `-J†w`.
    GaussNewton,
}

/// Residual `f(Q) - b`. `q` may be any 3×3 matrix.
pub fn wopp_residual(problem: &WoppProblem, q: &Matrix3<f64>) -> DVector<f64> {
    problem.f(q) - &problem.b
}

/// Generators of the skew parametrization: `skew(x) = Σ x_k E_k` with
/// `E_k = δ_i δ_jᵀ - δ_j δ_iᵀ` for `(i,j) ∈ {(2,1), (3,1), (3,2)}`.
const GENERATOR_INDICES: [(usize, usize); 3] = [(1, 0), (2, 0), (2, 1)];

fn generator(k: usize) -> Matrix3<f64> {
    let (i, j) = GENERATOR_INDICES[k];
    let mut e = Matrix3::zeros();
    e[(i, j)] = 1.0;
    e[(j, i)] = -1.0;
    e
}

/// Jacobian of `x ↦ f(Q̆ exp(X(x)))` at `x = 0`, as the K×3 matrix with
/// columns `f(Q̆ E_k)` for the three skew generators.
pub fn wopp_jacobian(problem: &WoppProblem, qbreve: &RotationMatrix) -> DMatrix<f64> {
    let k = problem.b.len();
    let mut jac = DMatrix::zeros(k, 3);
    for col in 0..3 {
        let v = problem.f(&(qbreve.matrix() * generator(col)));
        jac.set_column(col, &v);
    }
    jac
}

/// The six symmetric matrices of the `X²` expansion,
/// `X(x)² = Σ_{i≤j} x_i x_j T_{ij}`.
fn second_order_basis() -> [Matrix3<f64>; 6] {
    let d = |i: usize, j: usize| {
        let mut m = Matrix3::zeros();
        m[(i, j)] = 1.0;
        m
    };
    [
        -(d(0, 0) + d(1, 1)), // T11
        -(d(1, 2) + d(2, 1)), // T12
        d(0, 2) + d(2, 0),    // T13
        -(d(0, 0) + d(2, 2)), // T22
        -(d(0, 1) + d(1, 0)), // T23
        -(d(1, 1) + d(2, 2)), // T33
    ]
}

/// Second-order correction matrix `H` of the Newton system, built from
/// `h_ij = f(Q̆ T_ij)` and the residual `w = f(Q̆) - b`:
///
/// ```text
///       ⎡ 2wᵀh11   wᵀh12   wᵀh13 ⎤
/// H = ½ ⎢  wᵀh12  2wᵀh22   wᵀh23 ⎥
///       ⎣  wᵀh13   wᵀh23  2wᵀh33 ⎦
/// ```
pub fn wopp_hessian(
    problem: &WoppProblem,
    qbreve: &RotationMatrix,
    residual: &DVector<f64>,
) -> Matrix3<f64> {
    let t = second_order_basis();
    let wh: Vec<f64> = t
        .iter()
        .map(|tij| residual.dot(&problem.f(&(qbreve.matrix() * tij))))
        .collect();
    Matrix3::new(
        wh[0],
        0.5 * wh[1],
        0.5 * wh[2],
        0.5 * wh[1],
        wh[3],
        0.5 * wh[4],
        0.5 * wh[2],
        0.5 * wh[4],
        wh[5],
    )
}

/// Search direction at `qbreve`: the Newton step when `JᵀJ + H ≻ 0`
/// (tested by attempting a symmetric factorization), otherwise the
/// Gauss-Newton step `-J†w`.
pub fn wopp_step(
    problem: &WoppProblem,
    qbreve: &RotationMatrix,
) -> Result<(Vector3<f64>, StepKind)> {
    let w = wopp_residual(problem, qbreve.matrix());
    let jac = wopp_jacobian(problem, qbreve);
    let h = wopp_hessian(problem, qbreve, &w);
    step_from_parts(&jac, &w, &h)
}

fn step_from_parts(
    jac: &DMatrix<f64>,
    w: &DVector<f64>,
    h: &Matrix3<f64>,
) -> Result<(Vector3<f64>, StepKind)> {
    let jtj_dyn = jac.transpose() * jac;
    let jtj = Matrix3::from_fn(|i, j| jtj_dyn[(i, j)]);
    let grad_dyn = jac.transpose() * w;
    let grad = Vector3::new(grad_dyn[0], grad_dyn[1], grad_dyn[2]);

    if let Some(chol) = Cholesky::new(jtj + h) {
        return Ok((-chol.solve(&grad), StepKind::Newton));
    }

    let svd = jac.clone().svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-12 * sv.max().max(1.0) {
        return Err(Error::RankDeficient {
            what: "WOPP Jacobian",
            sigma_min: sv.min(),
        });
    }
    let x = svd.solve(w, 0.0).map_err(|_| Error::RankDeficient {
        what: "WOPP Jacobian",
        sigma_min: sv.min(),
    })?;
    Ok((-Vector3::new(x[0], x[1], x[2]), StepKind::GaussNewton))
}

/// Step length `γ̂ = argmin_{γ ∈ (0,1]} ‖f(Q̆ exp(X(γx))) - b‖²`.
///
/// Coarse grid over (0, 1] (including γ = 1), golden-section refinement
/// around the best grid point, then halving until the objective does not
/// exceed its γ→0⁺ limit. The returned γ̂ is always one of the sampled
/// points, so the objective at γ̂ is ≤ the objective at γ = 1 and at
/// every other sample.
pub fn wopp_linesearch(
    problem: &WoppProblem,
    qbreve: &RotationMatrix,
    direction: &Vector3<f64>,
    settings: &NewtonSettings,
) -> f64 {
    if direction.norm() == 0.0 {
        return 1.0;
    }
    let objective = |gamma: f64| -> f64 {
        let q = qbreve.matrix() * rotation_exp(&(direction * gamma)).matrix();
        wopp_residual(problem, &q).norm_squared()
    };

    let grid = settings.linesearch_grid.max(2);
    let mut best_gamma = 1.0;
    let mut best_obj = objective(1.0);
    for i in 1..grid {
        let gamma = i as f64 / grid as f64;
        let obj = objective(gamma);
        if obj < best_obj {
            best_obj = obj;
            best_gamma = gamma;
        }
    }

    // Golden-section pass on the bracket around the best grid point.
    let step = 1.0 / grid as f64;
    let mut lo = (best_gamma - step).max(0.0);
    let mut hi = (best_gamma + step).min(1.0);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let mut fc = objective(c);
    let mut fd = objective(d);
    for _ in 0..grid {
        if fc < best_obj && c > 0.0 {
            best_obj = fc;
            best_gamma = c;
        }
        if fd < best_obj && d > 0.0 {
            best_obj = fd;
            best_gamma = d;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = objective(d);
        }
    }

    // Monotone acceptance: never end above the no-move objective.
    let at_rest = wopp_residual(problem, qbreve.matrix()).norm_squared();
    let mut gamma = best_gamma;
    let mut obj = best_obj;
    let mut halvings = 0;
    while obj > at_rest && gamma > 1e-12 && halvings < 60 {
        gamma *= 0.5;
        obj = objective(gamma);
        halvings += 1;
    }
    if obj > at_rest {
        // Degenerate search; fall back to a full step.
        return 1.0;
    }
    gamma
}

/// Initial iterate for the Newton solver.
///
/// Solves the norm-constrained problem
/// `Q̌₀ = argmin ‖f(Q) - b‖²  s.t.  ‖vec(Q)‖₂ = √3`
/// by eigen-decomposing the 9×9 normal matrix and root-finding the
/// Lagrange multiplier on the secular equation, then projects `Q̌₀` onto
/// the rotation manifold. Returns the initializer and a flag that is true
/// when the problem was degenerate and the identity was used instead.
pub fn wopp_init(problem: &WoppProblem) -> (RotationMatrix, bool) {
    match constrained_init(problem) {
        Some(q9) => {
            let qcheck = Matrix3::from_column_slice(q9.as_slice());
            match nearest_orthogonal(&qcheck) {
                Ok(rot) => (rot, false),
                Err(_) => (RotationMatrix::identity(), true),
            }
        }
        None => (RotationMatrix::identity(), true),
    }
}

/// The norm-constrained minimizer `vec(Q̌₀)`, or `None` in the degenerate
/// cases where the constraint sphere is unreachable.
fn constrained_init(problem: &WoppProblem) -> Option<DVector<f64>> {
    const TARGET: f64 = 3.0; // ‖q‖² on the constraint sphere

    let design = problem.cbar.transpose().kronecker(&problem.aw);
    let normal = design.transpose() * &design;
    let rhs = design.transpose() * &problem.b;
    if rhs.norm() == 0.0 {
        return None;
    }

    let eig = SymmetricEigen::new(normal);
    let lambdas = &eig.eigenvalues;
    let v = &eig.eigenvectors;
    let coeffs = v.transpose() * rhs;

    let norm_sq =
        |mu: f64| -> f64 { (0..9).map(|i| (coeffs[i] / (lambdas[i] + mu)).powi(2)).sum() };

    let scale = lambdas.max().abs().max(1.0);
    let lo0 = -lambdas.min() + 1e-14 * scale;
    if !(norm_sq(lo0) > TARGET) {
        // Hard case: the multiplier branch cannot reach the sphere.
        return None;
    }
    let mut hi = lo0 + scale;
    let mut guard = 0;
    while norm_sq(hi) > TARGET {
        hi = lo0 + (hi - lo0) * 2.0;
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let mut lo = lo0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_sq(mid) > TARGET {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);

    let mut q9 = DVector::zeros(9);
    for i in 0..9 {
        q9 += v.column(i) * (coeffs[i] / (lambdas[i] + mu));
    }
    Some(q9)
}

/// `‖vec(Q̌₀)‖` of the norm-constrained initializer, for verifying the
/// active constraint.
#[doc(hidden)]
pub fn wopp_init_raw_norm(problem: &WoppProblem) -> Option<f64> {
    constrained_init(problem).map(|q| q.norm())
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
fn pinv(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smin, smax) = (sv.min(), sv.max());
    if smin <= 1e-12 * smax.max(1.0) {
        return Err(Error::RankDeficient {
            what,
            sigma_min: smin,
        });
    }
    svd.pseudo_inverse(0.0).map_err(|_| Error::RankDeficient {
        what,
        sigma_min: smin,
    })
}

/// Classical per-sensor localization `Ŝ_LS = Ā†D̄` (3×N); the topology is
/// not used.
pub fn classical_ls(model: &WhitenedModel) -> Result<DMatrix<f64>> {
    Ok(pinv(&model.abar, "whitened anchor matrix")? * &model.dbar)
}

/// Joint unconstrained LS estimate `q̂_e = (C_eᵀ ⊗ Ā)† d̄`.
///
/// The rotation block is not projected onto the manifold. Requires
/// `(M-1)·N ≥ 12` and full column rank of the extended design.
pub fn unconstrained_ls(model: &WhitenedModel, topology: &DMatrix<f64>) -> Result<PoseEstimate> {
    let n = topology.ncols();
    let rows = model.dbar.nrows();
    if rows * n < 12 {
        return Err(Error::InsufficientSensors {
            need: 12usize.div_ceil(rows.max(1)),
            have: n,
        });
    }
    // C_e = [C; 1ᵀ], 4×N.
    let mut c_e = DMatrix::zeros(4, n);
    c_e.view_mut((0, 0), (3, n)).copy_from(topology);
    c_e.view_mut((3, 0), (1, n)).fill(1.0);

    let design = c_e.transpose().kronecker(&model.abar);
    let svd = design.svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-10 * sv.max().max(1.0) {
        return Err(Error::RankDeficient {
            what: "extended topology design",
            sigma_min: sv.min(),
        });
    }
    let dvec = DVector::from_column_slice(model.dbar.as_slice());
    let qe = svd.solve(&dvec, 0.0).map_err(|_| Error::RankDeficient {
        what: "extended topology design",
        sigma_min: sv.min(),
    })?;

    let rotation = Matrix3::from_column_slice(&qe.as_slice()[0..9]);
    let translation = Vector3::new(qe[9], qe[10], qe[11]);
    Ok(PoseEstimate {
        rotation,
        translation,
        method: Method::Ls,
        iterations: 0,
        converged: true,
        init_fallback: false,
    })
}

/// Closed-form orthogonal Procrustes solution: the orthonormal `Q`
/// maximizing `tr(Q C̄ Ďᵀ)`, namely `V Uᵀ` from the SVD
/// `C̄ Ďᵀ = U Σ Vᵀ`. Errors when the product is singular (the maximizer
/// is not unique).
pub fn solve_opp(cbar: &DMatrix<f64>, dcheck: &DMatrix<f64>) -> Result<RotationMatrix> {
    let product = cbar * dcheck.transpose();
    let svd = product.svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-12 * sv.max().max(1.0) {
        return Err(Error::NonUniqueRotation { sigma_min: sv.min() });
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let q = (u * v_t).transpose();
    RotationMatrix::try_new(Matrix3::from_fn(|i, j| q[(i, j)]))
}

/// Translation `t̂ = (1/N)(Ā†D̄ - Q̂C) 1_N` given a rotation estimate.
fn translation_for(
    model: &WhitenedModel,
    topology: &DMatrix<f64>,
    rotation: &Matrix3<f64>,
) -> Result<Vector3<f64>> {
    let s_ls = classical_ls(model)?;
    let residual = s_ls - rotation * topology;
    let mean = residual.column_mean();
    Ok(Vector3::new(mean[0], mean[1], mean[2]))
}

fn procrustes_estimate(
    centered: &CenteredModel,
    model: &WhitenedModel,
    topology: &DMatrix<f64>,
    method: Method,
) -> Result<PoseEstimate> {
    let dcheck = pinv(&model.abar, "whitened anchor matrix")? * &centered.dtil;
    let rotation = solve_opp(&centered.cbar, &dcheck)?;
    let translation = translation_for(model, topology, rotation.matrix())?;
    Ok(PoseEstimate {
        rotation: *rotation.matrix(),
        translation,
        method,
        iterations: 0,
        converged: true,
        init_fallback: false,
    })
}

/// Simplified unitarily constrained LS: Procrustes on `Ď = Ā†D̃`.
pub fn suc_ls(
    centered: &CenteredModel,
    model: &WhitenedModel,
    topology: &DMatrix<f64>,
) -> Result<PoseEstimate> {
    procrustes_estimate(centered, model, topology, Method::SucLs)
}

/// Simplified unitarily constrained TLS. Identical to [`suc_ls`] by the
/// TLS equivalence theorem; only the method tag differs.
pub fn suc_tls(
    centered: &CenteredModel,
    model: &WhitenedModel,
    topology: &DMatrix<f64>,
) -> Result<PoseEstimate> {
    procrustes_estimate(centered, model, topology, Method::SucTls)
}

fn newton_estimate(
    problem: WoppProblem,
    model: &WhitenedModel,
    topology: &DMatrix<f64>,
    settings: &NewtonSettings,
    method: Method,
) -> Result<PoseEstimate> {
    let solution = problem.solve(settings)?;
    let translation = translation_for(model, topology, solution.rotation.matrix())?;
    Ok(PoseEstimate {
        rotation: *solution.rotation.matrix(),
        translation,
        method,
        iterations: solution.iterations,
        converged: solution.converged,
        init_fallback: solution.init_fallback,
    })
}

/// Optimal unitarily constrained LS: Newton iterations on
/// `min ‖(C̄ᵀ⊗Ā) vec(Q) - vec(D̃)‖` over orthonormal `Q`.
pub fn ouc_ls(
    centered: &CenteredModel,
    model: &WhitenedModel,
    topology: &DMatrix<f64>,
    settings: &NewtonSettings,
) -> Result<PoseEstimate> {
    let b = DVector::from_column_slice(centered.dtil.as_slice());
    let problem = WoppProblem::new(model.abar.clone(), centered.cbar.clone(), b)?;
    newton_estimate(problem, model, topology, settings, Method::OucLs)
}

/// Optimal unitarily constrained TLS: the same Newton machinery weighted
/// by `Λ^{-1/2}` with `Λ = ĀĀᵀ + I`.
pub fn ouc_tls(
    centered: &CenteredModel,
    model: &WhitenedModel,
    topology: &DMatrix<f64>,
    settings: &NewtonSettings,
) -> Result<PoseEstimate> {
    let k = model.abar.nrows();
    let lambda = &model.abar * model.abar.transpose() + DMatrix::identity(k, k);
    let lambda_inv_sqrt = symmetric_inverse_sqrt(&lambda);
    let aw = &lambda_inv_sqrt * &model.abar;
    let weighted = &lambda_inv_sqrt * &centered.dtil;
    let b = DVector::from_column_slice(weighted.as_slice());
    let problem = WoppProblem::new(aw, centered.cbar.clone(), b)?;
    newton_estimate(problem, model, topology, settings, Method::OucTls)
}

/// Symmetric positive-definite inverse square root via eigendecomposition.
pub fn symmetric_inverse_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        eig.eigenvectors[(i, j)] / eig.eigenvalues[j].sqrt()
    });
    scaled * eig.eigenvectors.transpose()
}

/// Topology-aware localization `Ŝ_TA = Q̂C + t̂1ᵀ`: reconstruct all
/// sensor positions from a pose estimate. Requires an orthonormal
/// rotation block.
pub fn ta_localization(estimate: &PoseEstimate, topology: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let defect = (estimate.rotation.transpose() * estimate.rotation - Matrix3::identity()).norm();
    if defect > 1e-8 {
        return Err(Error::NotOrthonormal { defect });
    }
    let rotated = estimate.rotation * topology;
    let mut s = DMatrix::from_column_slice(3, topology.ncols(), rotated.as_slice());
    for mut col in s.column_iter_mut() {
        col += estimate.translation;
    }
    Ok(s)
}
