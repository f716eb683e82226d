//! The outer Newton loop for generalized equations: each step solves the
//! partial linearization at the current iterate, hinted with that iterate so
//! set-valued steps pick the nearby solution. On top of the plain solver sit
//! the empirical order estimator, the certification run that checks every
//! inequality the majorant theory predicts, and a grid-based uniqueness scan.

use thiserror::Error;

use crate::avi::Avi;
use crate::linalg::{dist2, norm2};
use crate::majorant::{AxiomReport, MajorantError, MajorantSpec, RadiusReport};
use crate::problem::{
    check_majorant_inequality, CheckOptions, InequalityReport, ProblemError, ProblemInstance,
};

/// Residual level treated as converged (natural residual, not step size).
pub const DEFAULT_TOL_RESIDUAL: f64 = 1e-10;

/// Default Newton step cap.
pub const DEFAULT_MAX_ITER: usize = 50;

/// Residual threshold for flagging a second solution in the uniqueness scan.
pub const UNIQUENESS_RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("order undetermined: {0}")]
    OrderUndetermined(String),
    #[error("certification requires a known solution")]
    MissingSolution,
    #[error("majorant axiom verification failed: {axiom} at t = {t:e}")]
    AxiomFailure { axiom: &'static str, t: f64 },
    #[error("uniqueness scan supports n <= {cap}, got n = {n}")]
    UnsupportedDimension { n: usize, cap: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub tol_residual: f64,
    pub max_iter: usize,
    /// The run is declared divergent once ‖x_k − x₀‖ > divergence_radius·(1+‖x₀‖).
    pub divergence_radius: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_residual: DEFAULT_TOL_RESIDUAL,
            max_iter: DEFAULT_MAX_ITER,
            divergence_radius: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    SubproblemFailure,
    Diverged,
}

/// Full record of a Newton run.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub iterates: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// ‖x_k − x̄‖ when the solution is known.
    pub errors: Option<Vec<f64>>,
    /// Majorizing envelope t_k, attached by certification.
    pub envelope: Option<Vec<f64>>,
    /// e_{k+1}/e_k diagnostics when errors are known.
    pub error_ratios: Option<Vec<f64>>,
    /// Iterations at which the subproblem had several solutions.
    pub multi_solution_iters: Vec<usize>,
    pub status: SolveStatus,
    pub failure: Option<String>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    /// CSV with columns k, x (semicolon-joined), residual, error, t_k, ratio;
    /// one row per iteration; 17 significant digits throughout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,x,residual,error,t_k,ratio\n");
        for k in 0..self.iterates.len() {
            let x = self.iterates[k]
                .iter()
                .map(|v| fmt_float(*v))
                .collect::<Vec<_>>()
                .join(";");
            let residual = self.residuals.get(k).map(|v| fmt_float(*v)).unwrap_or_default();
            let error = self
                .errors
                .as_ref()
                .and_then(|e| e.get(k))
                .map(|v| fmt_float(*v))
                .unwrap_or_default();
            let t_k = self
                .envelope
                .as_ref()
                .and_then(|e| e.get(k))
                .map(|v| fmt_float(*v))
                .unwrap_or_default();
            let ratio = if k == 0 {
                String::new()
            } else {
                self.error_ratios
                    .as_ref()
                    .and_then(|r| r.get(k - 1))
                    .map(|v| fmt_float(*v))
                    .unwrap_or_default()
            };
            out.push_str(&format!("{k},{x},{residual},{error},{t_k},{ratio}\n"));
        }
        out
    }
}

/// 17 significant digits, locale-free.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs the Newton iteration x_{k+1} = subproblem solution hinted at x_k.
/// Termination: residual ≤ tol, the step cap, a subproblem failure, or the
/// divergence guard. Failures land in the status, not in a panic.
pub fn solve(problem: &ProblemInstance, x0: &[f64], config: &SolverConfig) -> IterationTrace {
    assert_eq!(x0.len(), problem.dim(), "x0 dimension mismatch");
    let mut iterates: Vec<Vec<f64>> = vec![x0.to_vec()];
    let mut residuals: Vec<f64> = Vec::new();
    let mut multi = Vec::new();
    let mut failure = None;
    let status = loop {
        let x = iterates.last().unwrap().clone();
        let r = match problem.natural_residual(&x) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(e.to_string());
                break SolveStatus::SubproblemFailure;
            }
        };
        residuals.push(r);
        if r <= config.tol_residual {
            break SolveStatus::Converged;
        }
        if iterates.len() - 1 >= config.max_iter {
            break SolveStatus::MaxIter;
        }
        let avi = Avi::linearize(problem, &x);
        let sol = match avi.solve(&x, None) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e.to_string());
                break SolveStatus::SubproblemFailure;
            }
        };
        if sol.candidates > 1 {
            multi.push(iterates.len() - 1);
        }
        let diverged = dist2(&sol.z, x0) > config.divergence_radius * (1.0 + norm2(x0));
        iterates.push(sol.z);
        if diverged {
            if let Ok(r) = problem.natural_residual(iterates.last().unwrap()) {
                residuals.push(r);
            }
            break SolveStatus::Diverged;
        }
    };
    let errors: Option<Vec<f64>> =
        problem.solution().map(|xb| iterates.iter().map(|x| dist2(x, xb)).collect());
    let error_ratios = errors.as_ref().map(|e| {
        e.windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN })
            .collect()
    });
    IterationTrace {
        iterates,
        residuals,
        errors,
        envelope: None,
        error_ratios,
        multi_solution_iters: multi,
        status,
        failure,
    }
}

/// Least-squares slope of log e_{k+1} against log e_k over the tail of
/// errors sitting above the rounding floor. Needs at least four usable
/// errors spanning four orders of magnitude.
pub fn estimate_order(trace: &IterationTrace) -> Result<f64, DriverError> {
    let errors = trace
        .errors
        .as_ref()
        .ok_or_else(|| DriverError::OrderUndetermined("trace has no known-solution errors".into()))?;
    estimate_order_from_errors(errors)
}

pub fn estimate_order_from_errors(errors: &[f64]) -> Result<f64, DriverError> {
    let floor = 1e-14 * (1.0 + errors.first().copied().unwrap_or(0.0));
    let usable: Vec<f64> = errors.iter().copied().filter(|&e| e > floor).collect();
    if usable.len() < 4 {
        return Err(DriverError::OrderUndetermined(format!(
            "only {} errors above the rounding floor",
            usable.len()
        )));
    }
    let max = usable.iter().cloned().fold(f64::MIN, f64::max);
    let min = usable.iter().cloned().fold(f64::MAX, f64::min);
    if max / min < 1e4 {
        return Err(DriverError::OrderUndetermined(
            "errors span fewer than 4 orders of magnitude".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = errors
        .windows(2)
        .filter(|w| w[0] > floor && w[1] > floor)
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    if var == 0.0 {
        return Err(DriverError::OrderUndetermined("degenerate error sequence".into()));
    }
    Ok(cov / var)
}

/// Grid-based search for spurious solutions inside a ball around x̄.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub radius: f64,
    pub grid_per_dim: usize,
    pub spacing: f64,
    pub points_scanned: usize,
    /// Points with natural residual below the flag threshold lying farther
    /// than 10 grid spacings from x̄, with their residuals.
    pub flagged: Vec<(Vec<f64>, f64)>,
    pub pass: bool,
}

/// Scans natural residuals on a grid over B(x̄, radius) (n ≤ 3) and flags
/// candidate second solutions.
pub fn uniqueness_scan(
    problem: &ProblemInstance,
    radius: f64,
    grid_per_dim: usize,
) -> Result<UniquenessReport, DriverError> {
    let n = problem.dim();
    if n > 3 {
        return Err(DriverError::UnsupportedDimension { n, cap: 3 });
    }
    if grid_per_dim < 2 {
        return Err(DriverError::OrderUndetermined("grid_per_dim must be at least 2".into()));
    }
    let xbar = problem.solution().ok_or(DriverError::MissingSolution)?.to_vec();
    let spacing = 2.0 * radius / (grid_per_dim - 1) as f64;
    let exclusion = 10.0 * spacing;
    let mut flagged = Vec::new();
    let mut scanned = 0usize;
    let total = grid_per_dim.pow(n as u32);
    let mut point = vec![0.0; n];
    for flat in 0..total {
        let mut rem = flat;
        for j in 0..n {
            let idx = rem % grid_per_dim;
            rem /= grid_per_dim;
            point[j] = xbar[j] - radius + spacing * idx as f64;
        }
        let d = dist2(&point, &xbar);
        if d > radius * (1.0 + 1e-12) {
            continue;
        }
        scanned += 1;
        let residual = problem.natural_residual(&point)?;
        if residual < UNIQUENESS_RESIDUAL_TOL && d > exclusion && flagged.len() < 64 {
            flagged.push((point.clone(), residual));
        }
    }
    let pass = flagged.is_empty();
    Ok(UniquenessReport { radius, grid_per_dim, spacing, points_scanned: scanned, flagged, pass })
}

/// Knobs for a certification run.
#[derive(Debug, Clone)]
pub struct CertifyConfig {
    pub solver: SolverConfig,
    pub checks: CheckOptions,
    /// Grid resolution for the uniqueness scan, by dimension n = 1, 2, 3.
    pub uniqueness_grid: [usize; 3],
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            solver: SolverConfig::default(),
            checks: CheckOptions::default(),
            uniqueness_grid: [2001, 201, 41],
        }
    }
}

/// Everything the majorant theory predicts for one run, checked empirically.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub radii: RadiusReport,
    pub t0: f64,
    pub axioms: AxiomReport,
    /// t₀ < r, the admission precondition.
    pub start_in_radius: bool,
    pub majorant_inequality: InequalityReport,
    pub trace: IterationTrace,
    pub converged: bool,
    /// ‖x_k − x̄‖ ≤ t_k per iteration (with additive slack 1e−10·(1+t₀)).
    pub majorization_ok: bool,
    pub majorization_violation: Option<usize>,
    /// e_{k+1} ≤ (t_{k+1}/t_k^{p+1})·e_k^{p+1} per iteration.
    pub rate_ok: bool,
    pub rate_violation: Option<usize>,
    /// ψ″(t₀)/(2|ψ'(t₀)|), attached when the rate exponent is 1.
    pub quadratic_ratio_bound: Option<f64>,
    pub quadratic_ratio_ok: Option<bool>,
    /// Errors strictly decrease above the rounding floor.
    pub monotone_ok: bool,
    pub uniqueness: Option<UniquenessReport>,
    pub pass: bool,
}

/// Runs Newton from x₀ and checks the run against the majorant theory:
/// radii, the start-radius precondition, the sampled majorant inequality,
/// per-iteration majorization and rate bounds, error monotonicity, and (for
/// n ≤ 3) the uniqueness scan on B(x̄, min(r, σ)).
pub fn certify(
    problem: &ProblemInstance,
    spec: &MajorantSpec,
    x0: &[f64],
    config: &CertifyConfig,
) -> Result<Certificate, DriverError> {
    let xbar = problem.solution().ok_or(DriverError::MissingSolution)?.to_vec();
    let grid = spec.default_grid()?;
    let p = spec.rate_exponent();
    let axioms = spec.verify_axioms(&grid, p)?;
    if !axioms.pass() {
        let (axiom, t) = if !axioms.h1.pass {
            ("h1", axioms.h1.first_violation)
        } else if !axioms.h2.pass {
            ("h2", axioms.h2.first_violation)
        } else if !axioms.h3.pass {
            ("h3", axioms.h3.first_violation)
        } else {
            ("smoothness", axioms.smoothness.first_violation)
        };
        return Err(DriverError::AxiomFailure { axiom, t: t.unwrap_or(f64::NAN) });
    }
    let radii = spec.radii(problem.kappa())?;
    let t0 = dist2(&xbar, x0);
    let start_in_radius = t0 < radii.r;
    let majorant_inequality = check_majorant_inequality(problem, spec, &config.checks)?;

    let mut trace = solve(problem, x0, &config.solver);
    let steps = trace.len().saturating_sub(1);
    let envelope: Option<Vec<f64>> = if t0 == 0.0 {
        Some(vec![0.0; trace.len()])
    } else if t0 < radii.rho {
        spec.majorizing_sequence(t0, steps, 0.0).ok()
    } else {
        None
    };
    trace.envelope = envelope.clone();

    let slack = 1e-10 * (1.0 + t0);
    let noise_floor = 1e-14 * (1.0 + t0);
    let errors = trace.errors.clone().unwrap_or_default();

    let mut majorization_ok = envelope.is_some();
    let mut majorization_violation = None;
    if let Some(env) = &envelope {
        for (k, e) in errors.iter().enumerate() {
            match env.get(k) {
                Some(t) if *e <= t + slack => {}
                _ => {
                    majorization_ok = false;
                    majorization_violation = Some(k);
                    break;
                }
            }
        }
    }

    let mut rate_ok = envelope.is_some();
    let mut rate_violation = None;
    if let Some(env) = &envelope {
        for k in 0..errors.len().saturating_sub(1) {
            let (Some(tk), Some(tk1)) = (env.get(k), env.get(k + 1)) else { break };
            if *tk <= 0.0 {
                break;
            }
            let bound = (tk1 / tk.powf(p + 1.0)) * errors[k].powf(p + 1.0) + slack;
            if errors[k + 1] > bound {
                rate_ok = false;
                rate_violation = Some(k);
                break;
            }
        }
    }

    let (quadratic_ratio_bound, quadratic_ratio_ok) = if p == 1.0 && t0 > 0.0 && t0 < radii.nu {
        let v0 = spec.eval(t0)?;
        let bound = v0.ddpsi / (2.0 * v0.dpsi.abs());
        let mut ok = true;
        for k in 0..errors.len().saturating_sub(1) {
            if errors[k] <= noise_floor || errors[k + 1] <= noise_floor {
                continue;
            }
            if errors[k + 1] / (errors[k] * errors[k]) > bound + 1e-9 {
                ok = false;
                break;
            }
        }
        (Some(bound), Some(ok))
    } else {
        (None, None)
    };

    let mut monotone_ok = true;
    for w in errors.windows(2) {
        if w[0] <= noise_floor || w[1] <= noise_floor {
            continue;
        }
        if !(w[1] < w[0]) {
            monotone_ok = false;
            break;
        }
    }

    let uniqueness = if problem.dim() <= 3 {
        let radius = radii.r.min(radii.sigma);
        let grid_points = config.uniqueness_grid[problem.dim() - 1];
        Some(uniqueness_scan(problem, radius, grid_points)?)
    } else {
        None
    };

    let converged = trace.status == SolveStatus::Converged;
    let pass = start_in_radius
        && majorant_inequality.pass
        && converged
        && majorization_ok
        && rate_ok
        && quadratic_ratio_ok.unwrap_or(true)
        && monotone_ok
        && uniqueness.as_ref().map_or(true, |u| u.pass);

    Ok(Certificate {
        radii,
        t0,
        axioms,
        start_in_radius,
        majorant_inequality,
        trace,
        converged,
        majorization_ok,
        majorization_violation,
        rate_ok,
        rate_violation,
        quadratic_ratio_bound,
        quadratic_ratio_ok,
        monotone_ok,
        uniqueness,
        pass,
    })
}
