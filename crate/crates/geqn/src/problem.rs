//! Problem representation for generalized equations f(x) + F(x) ∋ 0 at
//! finite dimension: the constraint set F (zero map or polyhedral normal
//! cone), evaluators for f and its derivatives, the natural residual, and
//! the sampled inequality checkers that tie a problem to a majorant.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{self, norm2, Mat};
use crate::majorant::{MajorantError, MajorantForm, MajorantSpec};
use crate::poly::PolySystem;

/// Residual tolerance a declared solution must meet at load time.
pub const SOLUTION_RESIDUAL_TOL: f64 = 1e-10;

/// Componentwise tolerance for the finite-difference Jacobian probe.
pub const JACOBIAN_PROBE_TOL: f64 = 1e-5;

/// Maximum number of polyhedron constraints (active-set enumeration scale).
pub const MAX_POLYHEDRON_ROWS: usize = 12;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("solution residual {residual:.1e} > {tol:.0e}")]
    SolutionResidual { residual: f64, tol: f64 },
    #[error("jacobian entry ({row},{col}) disagrees with finite differences by {error:.2e}")]
    JacobianMismatch { row: usize, col: usize, error: f64 },
    #[error("operation requires a known solution")]
    MissingSolution,
    #[error("the zero map has no projection")]
    NoProjection,
    #[error("polyhedron is empty: projection infeasible")]
    InfeasiblePolyhedron,
    #[error("polyhedron has {m} rows; enumeration is capped at {max}", max = MAX_POLYHEDRON_ROWS)]
    PolyhedronTooLarge { m: usize },
    #[error("operation requires second derivatives (hessian evaluator or polynomial form)")]
    SecondDerivativeUnavailable,
    #[error("operation requires the exact polynomial form")]
    PolynomialFormRequired,
    #[error("unsupported majorant for this check: {0}")]
    UnsupportedSpec(String),
    #[error("sampling ball is unbounded; set a finite kappa")]
    UnboundedSamplingBall,
    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// The set C whose normal cone forms F, or the zero map for plain equations.
#[derive(Debug, Clone, PartialEq)]
pub enum SetDescriptor {
    /// F(x) ≡ {0}: the inclusion is the equation f(x) = 0.
    ZeroMap,
    /// Nonnegative orthant of the given dimension.
    Orthant(usize),
    /// Componentwise bounds; ±∞ entries allowed.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// {x : A x ≤ b} with at least one row.
    Polyhedron { a: Mat, b: Vec<f64> },
}

impl SetDescriptor {
    pub fn validate(&self, n: usize) -> Result<(), ProblemError> {
        match self {
            SetDescriptor::ZeroMap => Ok(()),
            SetDescriptor::Orthant(m) => {
                if *m != n {
                    return Err(ProblemError::Invalid(format!(
                        "orthant dimension {m} != problem dimension {n}"
                    )));
                }
                Ok(())
            }
            SetDescriptor::Box { lower, upper } => {
                if lower.len() != n || upper.len() != n {
                    return Err(ProblemError::Invalid("box bound lengths must equal n".into()));
                }
                for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if !(l <= u) {
                        return Err(ProblemError::Invalid(format!(
                            "box bounds inverted at coordinate {i}: {l} > {u}"
                        )));
                    }
                }
                Ok(())
            }
            SetDescriptor::Polyhedron { a, b } => {
                if a.rows() == 0 {
                    return Err(ProblemError::Invalid("polyhedron needs at least one row".into()));
                }
                if a.rows() > MAX_POLYHEDRON_ROWS {
                    return Err(ProblemError::PolyhedronTooLarge { m: a.rows() });
                }
                if a.cols() != n || b.len() != a.rows() {
                    return Err(ProblemError::Invalid(format!(
                        "polyhedron dimensions {}x{} / b len {} inconsistent with n = {n}",
                        a.rows(),
                        a.cols(),
                        b.len()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Euclidean projection onto the set. Undefined for the zero map.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>, ProblemError> {
        match self {
            SetDescriptor::ZeroMap => Err(ProblemError::NoProjection),
            SetDescriptor::Orthant(_) => Ok(v.iter().map(|x| x.max(0.0)).collect()),
            SetDescriptor::Box { lower, upper } => Ok(v
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(x, (l, u))| x.max(*l).min(*u))
                .collect()),
            SetDescriptor::Polyhedron { a, b } => project_polyhedron(a, b, v),
        }
    }
}

/// Projection onto {x : Ax ≤ b} by active-set enumeration: for every subset
/// S of rows, the equality-constrained projection is v − A_Sᵀ μ with
/// μ = (A_S A_Sᵀ)⁻¹ (A_S v − b_S); keep KKT-consistent feasible candidates
/// and return the closest. Doubles as a desk-scale oracle.
fn project_polyhedron(a: &Mat, b: &[f64], v: &[f64]) -> Result<Vec<f64>, ProblemError> {
    let m = a.rows();
    if m > MAX_POLYHEDRON_ROWS {
        return Err(ProblemError::PolyhedronTooLarge { m });
    }
    let scale = 1.0 + b.iter().fold(0.0_f64, |s, x| s.max(x.abs())) + norm2(v);
    let feas_tol = 1e-9 * scale;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let z = if rows.is_empty() {
            v.to_vec()
        } else {
            let a_s = a.submatrix(&rows, &(0..a.cols()).collect::<Vec<_>>());
            let gram = a_s.matmul(&a_s.transpose());
            let rhs: Vec<f64> = rows.iter().map(|&i| linalg::dot(a.row(i), v) - b[i]).collect();
            let mu = match linalg::solve_linear(&gram, &rhs) {
                Ok(mu) => mu,
                Err(_) => continue,
            };
            if mu.iter().any(|&m| m < -feas_tol) {
                continue;
            }
            let mut z = v.to_vec();
            for (k, &i) in rows.iter().enumerate() {
                for j in 0..a.cols() {
                    z[j] -= a[(i, j)] * mu[k];
                }
            }
            z
        };
        let feasible = (0..m).all(|i| linalg::dot(a.row(i), &z) <= b[i] + feas_tol);
        if !feasible {
            continue;
        }
        let d = linalg::dist2(v, &z);
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, z));
        }
    }
    best.map(|(_, z)| z).ok_or(ProblemError::InfeasiblePolyhedron)
}

type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type JacFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;
type HessFn = Arc<dyn Fn(&[f64]) -> Vec<Mat> + Send + Sync>;

/// A generalized-equation instance: dimension, evaluators, constraint set,
/// optional known solution x̄, and the domain radius κ with B(x̄, κ) ⊆ Ω.
#[derive(Clone)]
pub struct ProblemInstance {
    n: usize,
    f: VecFn,
    jac: JacFn,
    hess: Option<HessFn>,
    poly: Option<PolySystem>,
    set: SetDescriptor,
    solution: Option<Vec<f64>>,
    kappa: f64,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("n", &self.n)
            .field("set", &self.set)
            .field("solution", &self.solution)
            .field("kappa", &self.kappa)
            .field("poly", &self.poly.is_some())
            .finish()
    }
}

/// Builder for [`ProblemInstance`]; `build` runs the load-time validation
/// (declared-solution residual and a finite-difference Jacobian probe).
pub struct ProblemBuilder {
    n: usize,
    f: VecFn,
    jac: JacFn,
    hess: Option<HessFn>,
    poly: Option<PolySystem>,
    set: SetDescriptor,
    solution: Option<Vec<f64>>,
    kappa: f64,
}

impl ProblemBuilder {
    pub fn from_poly(poly: PolySystem, set: SetDescriptor) -> Self {
        let n = poly.dim();
        let p1 = poly.clone();
        let p2 = poly.clone();
        ProblemBuilder {
            n,
            f: Arc::new(move |x| p1.eval(x)),
            jac: Arc::new(move |x| p2.jacobian(x)),
            hess: None,
            poly: Some(poly),
            set,
            solution: None,
            kappa: f64::INFINITY,
        }
    }

    pub fn from_fns(
        n: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jac: impl Fn(&[f64]) -> Mat + Send + Sync + 'static,
        set: SetDescriptor,
    ) -> Self {
        ProblemBuilder {
            n,
            f: Arc::new(f),
            jac: Arc::new(jac),
            hess: None,
            poly: None,
            set,
            solution: None,
            kappa: f64::INFINITY,
        }
    }

    pub fn solution(mut self, x: Vec<f64>) -> Self {
        self.solution = Some(x);
        self
    }

    pub fn kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn hessians(
        mut self,
        hess: impl Fn(&[f64]) -> Vec<Mat> + Send + Sync + 'static,
    ) -> Self {
        self.hess = Some(Arc::new(hess));
        self
    }

    pub fn build(self) -> Result<ProblemInstance, ProblemError> {
        self.set.validate(self.n)?;
        if !(self.kappa > 0.0) {
            return Err(ProblemError::Invalid(format!("kappa must be positive, got {}", self.kappa)));
        }
        if let Some(sol) = &self.solution {
            if sol.len() != self.n {
                return Err(ProblemError::Invalid("solution length must equal n".into()));
            }
        }
        let problem = ProblemInstance {
            n: self.n,
            f: self.f,
            jac: self.jac,
            hess: self.hess,
            poly: self.poly,
            set: self.set,
            solution: self.solution,
            kappa: self.kappa,
        };
        if let Some(sol) = problem.solution.clone() {
            let residual = problem.natural_residual(&sol)?;
            if residual > SOLUTION_RESIDUAL_TOL {
                return Err(ProblemError::SolutionResidual {
                    residual,
                    tol: SOLUTION_RESIDUAL_TOL,
                });
            }
        }
        problem.probe_jacobian()?;
        Ok(problem)
    }
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn set(&self) -> &SetDescriptor {
        &self.set
    }

    pub fn solution(&self) -> Option<&[f64]> {
        self.solution.as_deref()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn poly(&self) -> Option<&PolySystem> {
        self.poly.as_ref()
    }

    pub fn f(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    pub fn jac(&self, x: &[f64]) -> Mat {
        (self.jac)(x)
    }

    /// Component Hessians from the explicit evaluator or the polynomial form.
    pub fn hessians_at(&self, x: &[f64]) -> Option<Vec<Mat>> {
        if let Some(h) = &self.hess {
            return Some(h(x));
        }
        self.poly.as_ref().map(|p| p.hessians(x))
    }

    pub fn has_second_derivatives(&self) -> bool {
        self.hess.is_some() || self.poly.is_some()
    }

    /// E_f(x, y) = f(y) − [f(x) + f'(x)(y − x)].
    pub fn linearization_error(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let fx = self.f(x);
        let fy = self.f(y);
        let step = self.jac(x).matvec(&linalg::sub_vec(y, x));
        (0..self.n).map(|i| fy[i] - fx[i] - step[i]).collect()
    }

    /// ‖x − Π_C(x − f(x))‖₂ for normal-cone sets, ‖f(x)‖₂ for the zero map.
    /// Vanishes exactly at solutions of the generalized equation.
    pub fn natural_residual(&self, x: &[f64]) -> Result<f64, ProblemError> {
        let fx = self.f(x);
        match &self.set {
            SetDescriptor::ZeroMap => Ok(norm2(&fx)),
            set => {
                let shifted = linalg::sub_vec(x, &fx);
                let projected = set.project(&shifted)?;
                Ok(linalg::dist2(x, &projected))
            }
        }
    }

    fn probe_jacobian(&self) -> Result<(), ProblemError> {
        let center = self
            .solution
            .clone()
            .unwrap_or_else(|| vec![0.0; self.n]);
        let reach = if self.kappa.is_finite() { (0.5 * self.kappa).min(1.0) } else { 1.0 };
        // tiny deterministic LCG for probe offsets
        let mut state = 0x2545F4914F6CDD1D_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..4 {
            let x: Vec<f64> =
                center.iter().map(|c| c + reach * (2.0 * next() - 1.0) * 0.3).collect();
            let jac = self.jac(&x);
            for j in 0..self.n {
                let h = 1e-6 * x[j].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fp = self.f(&xp);
                let fm = self.f(&xm);
                for i in 0..self.n {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    let err = (fd - jac[(i, j)]).abs();
                    if err > JACOBIAN_PROBE_TOL * jac[(i, j)].abs().max(1.0) {
                        return Err(ProblemError::JacobianMismatch { row: i, col: j, error: err });
                    }
                }
            }
        }
        Ok(())
    }

    /// Sampling ball radius min(κ, R); errors if unbounded.
    fn sampling_radius(&self, spec: &MajorantSpec) -> Result<f64, ProblemError> {
        let r = self.kappa.min(spec.domain_radius());
        if r.is_finite() {
            Ok(r)
        } else {
            Err(ProblemError::UnboundedSamplingBall)
        }
    }

    /// The tight scalar witness for a Hölder or Smale majorant: the odd
    /// extension f(x) = sign(x)·ψ(|x|) with x̄ = 0 and the zero map.
    ///
    /// Requires λ = 1 (the construction normalizes the modulus away). Newton
    /// iterates started at t₀ ∈ (0, ρ) alternate in sign with |x_k| equal to
    /// the majorizing sequence.
    pub fn extremal(spec: &MajorantSpec) -> Result<ProblemInstance, ProblemError> {
        match spec.form() {
            MajorantForm::Hoelder { .. } | MajorantForm::Smale { .. } => {}
            MajorantForm::Custom { .. } => {
                return Err(ProblemError::UnsupportedSpec(
                    "extremal witness needs a Hoelder or Smale form".into(),
                ))
            }
        }
        if spec.lambda() != 1.0 {
            return Err(ProblemError::UnsupportedSpec(format!(
                "extremal witness requires lambda = 1, got {}",
                spec.lambda()
            )));
        }
        let rho = spec.rho()?;
        let kappa = spec.domain_radius().min(6.0 * rho);
        let s_f = spec.clone();
        let s_j = spec.clone();
        ProblemBuilder::from_fns(
            1,
            move |x: &[f64]| {
                let t = x[0].abs();
                let v = s_f.eval(t).expect("extremal evaluation inside domain");
                vec![if x[0] < 0.0 { -v.psi } else { v.psi }]
            },
            move |x: &[f64]| {
                let t = x[0].abs();
                let v = s_j.eval(t).expect("extremal evaluation inside domain");
                Mat::from_rows(&[&[v.dpsi]])
            },
            SetDescriptor::ZeroMap,
        )
        .solution(vec![0.0])
        .kappa(kappa)
        .build()
    }
}

// --- sampled inequality checkers --------------------------------------------

/// Options shared by the sampling checkers. The defaults (2000 samples, a
/// 33-point τ grid, seed 42) are the documented reproducible configuration.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub samples: usize,
    pub tau_points: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { samples: 2000, tau_points: 33, seed: 42 }
    }
}

/// Outcome of a sampled ∀-inequality check. `max_violation` is the largest
/// observed LHS − RHS (negative when the inequality held with slack
/// everywhere); failure is certified exactly, success only up to sampling.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub samples: usize,
    pub max_violation: f64,
    pub worst_x: Option<Vec<f64>>,
    pub worst_tau: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn sample_in_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let n = center.len();
    loop {
        let dir: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        let nrm = norm2(&dir);
        if nrm < 1e-12 {
            continue;
        }
        let u: f64 = rng.gen();
        let r = radius * u.powf(1.0 / n as f64);
        return center.iter().zip(&dir).map(|(c, d)| c + r * d / nrm).collect();
    }
}

/// Checks λ‖f'(x) − f'(x̄ + τ(x − x̄))‖ ≤ ψ'(‖x−x̄‖) − ψ'(τ‖x−x̄‖) over
/// sampled x ∈ B(x̄, min(κ, R)) and a uniform τ grid on [0, 1].
pub fn check_majorant_inequality(
    problem: &ProblemInstance,
    spec: &MajorantSpec,
    opts: &CheckOptions,
) -> Result<InequalityReport, ProblemError> {
    let xbar = problem.solution().ok_or(ProblemError::MissingSolution)?.to_vec();
    let radius = problem.sampling_radius(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lambda = spec.lambda();

    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = None;
    let mut scale = 0.0_f64;
    for _ in 0..opts.samples {
        let x = sample_in_ball(&mut rng, &xbar, radius);
        let d = linalg::dist2(&x, &xbar);
        let jac_x = problem.jac(&x);
        let psi_d = spec.eval(d)?;
        for j in 0..opts.tau_points {
            let tau = j as f64 / (opts.tau_points - 1) as f64;
            let mid: Vec<f64> =
                xbar.iter().zip(&x).map(|(b, xi)| b + tau * (xi - b)).collect();
            let lhs = lambda * jac_x.sub(&problem.jac(&mid)).spectral_norm();
            let rhs = psi_d.dpsi - spec.eval(tau * d)?.dpsi;
            scale = scale.max(lhs.abs()).max(rhs.abs());
            let violation = lhs - rhs;
            if violation > max_violation {
                max_violation = violation;
                worst = Some((x.clone(), tau));
            }
        }
    }
    let tolerance = 1e-9 + 1e-9 * scale;
    let (worst_x, worst_tau) = match worst {
        Some((x, tau)) => (Some(x), Some(tau)),
        None => (None, None),
    };
    Ok(InequalityReport {
        samples: opts.samples,
        max_violation,
        worst_x,
        worst_tau,
        tolerance,
        pass: max_violation <= tolerance,
    })
}

/// Checks λ‖E_f(x, x̄)‖ ≤ e_ψ(‖x−x̄‖, 0) over sampled x ∈ B(x̄, min(κ, R)).
pub fn check_taylor_bound(
    problem: &ProblemInstance,
    spec: &MajorantSpec,
    opts: &CheckOptions,
) -> Result<InequalityReport, ProblemError> {
    let xbar = problem.solution().ok_or(ProblemError::MissingSolution)?.to_vec();
    let radius = problem.sampling_radius(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lambda = spec.lambda();

    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = None;
    let mut scale = 0.0_f64;
    for _ in 0..opts.samples {
        let x = sample_in_ball(&mut rng, &xbar, radius);
        let d = linalg::dist2(&x, &xbar);
        let lhs = lambda * norm2(&problem.linearization_error(&x, &xbar));
        let rhs = spec.linearization_error(d, 0.0)?;
        scale = scale.max(lhs.abs()).max(rhs.abs());
        let violation = lhs - rhs;
        if violation > max_violation {
            max_violation = violation;
            worst = Some(x.clone());
        }
    }
    let tolerance = 1e-9 * (1.0 + scale);
    Ok(InequalityReport {
        samples: opts.samples,
        max_violation,
        worst_x: worst,
        worst_tau: None,
        tolerance,
        pass: max_violation <= tolerance,
    })
}

/// Checks λ‖f″(x)‖ ≤ ψ″(‖x−x̄‖) over x ∈ B(x̄, min(κ, R)·(1−1e−6)); the
/// center is always included so the equality case at d = 0 is exercised.
/// Requires second-derivative access and a Smale or Hölder p = 1 majorant.
pub fn check_second_derivative_bounds(
    problem: &ProblemInstance,
    spec: &MajorantSpec,
    opts: &CheckOptions,
) -> Result<InequalityReport, ProblemError> {
    match spec.form() {
        MajorantForm::Smale { .. } => {}
        MajorantForm::Hoelder { p, .. } if *p == 1.0 => {}
        _ => {
            return Err(ProblemError::UnsupportedSpec(
                "second-derivative bound needs a Smale or Hoelder p = 1 majorant".into(),
            ))
        }
    }
    if !problem.has_second_derivatives() {
        return Err(ProblemError::SecondDerivativeUnavailable);
    }
    let xbar = problem.solution().ok_or(ProblemError::MissingSolution)?.to_vec();
    let radius = problem.sampling_radius(spec)? * (1.0 - 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lambda = spec.lambda();

    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = None;
    let mut scale = 0.0_f64;
    for k in 0..opts.samples {
        let x = if k == 0 { xbar.clone() } else { sample_in_ball(&mut rng, &xbar, radius) };
        let d = linalg::dist2(&x, &xbar);
        let hess = problem.hessians_at(&x).ok_or(ProblemError::SecondDerivativeUnavailable)?;
        let lhs = lambda * crate::poly::bilinear_norm(&hess);
        let rhs = spec.eval(d)?.ddpsi;
        scale = scale.max(lhs.abs()).max(rhs.abs().min(1e300));
        let violation = lhs - rhs;
        if violation > max_violation {
            max_violation = violation;
            worst = Some(x.clone());
        }
    }
    let tolerance = 1e-9 * (1.0 + scale);
    Ok(InequalityReport {
        samples: opts.samples,
        max_violation,
        worst_x: worst,
        worst_tau: None,
        tolerance,
        pass: max_violation <= tolerance,
    })
}

/// A sampled Lipschitz estimate for f' on B[center, radius].
#[derive(Debug, Clone, Copy)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub samples: usize,
}

/// Estimates L with ‖f'(x) − f'(y)‖ ≤ L‖x − y‖ by maximizing difference
/// quotients over sampled pairs; when second derivatives are available the
/// estimate also maximizes ‖f″‖ over interior and axis-boundary points.
/// Always a lower bound on the true constant.
pub fn fit_lipschitz(
    problem: &ProblemInstance,
    center: &[f64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<LipschitzEstimate, ProblemError> {
    if !(radius > 0.0) {
        return Err(ProblemError::InvalidRadius(radius));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for _ in 0..samples {
        let x = sample_in_ball(&mut rng, center, radius);
        let y = sample_in_ball(&mut rng, center, radius);
        let d = linalg::dist2(&x, &y);
        if d < 1e-12 {
            continue;
        }
        best = best.max(problem.jac(&x).sub(&problem.jac(&y)).spectral_norm() / d);
    }
    if problem.has_second_derivatives() {
        let mut points = vec![center.to_vec()];
        for j in 0..problem.dim() {
            for sign in [-1.0, 1.0] {
                let mut p = center.to_vec();
                p[j] += sign * radius;
                points.push(p);
            }
        }
        for _ in 0..samples / 4 {
            points.push(sample_in_ball(&mut rng, center, radius));
        }
        for p in points {
            if let Some(h) = problem.hessians_at(&p) {
                best = best.max(crate::poly::bilinear_norm(&h));
            }
        }
    }
    Ok(LipschitzEstimate { value: best, samples })
}

/// The analytic-growth constant sup_{m>1} ‖λ f⁽ᵐ⁾(x̄)/m!‖^{1/(m−1)},
/// computed exactly from the polynomial form (the sup is a max over
/// 2 ≤ m ≤ total degree). Affine systems give 0 by the empty-sup convention.
pub fn smale_gamma(problem: &ProblemInstance, lambda: f64) -> Result<f64, ProblemError> {
    let poly = match &problem.poly {
        Some(p) => p,
        None => return Err(ProblemError::PolynomialFormRequired),
    };
    let xbar = problem.solution().ok_or(ProblemError::MissingSolution)?;
    let degree = poly.total_degree() as usize;
    let mut gamma = 0.0_f64;
    for m in 2..=degree {
        let factorial: f64 = (1..=m).map(|k| k as f64).product();
        let nrm = poly.derivative_tensor(xbar, m).norm();
        if nrm == 0.0 {
            continue;
        }
        gamma = gamma.max((lambda * nrm / factorial).powf(1.0 / (m as f64 - 1.0)));
    }
    Ok(gamma)
}
