//! Scalar majorant functions ψ on [0, R), their Newton map, majorizing
//! sequences, and the certified radii ν, ρ, σ, r.
//!
//! A majorant is a scalar convex-like profile with ψ(0) = 0 and ψ'(0) = −1
//! whose derivative growth dominates the Jacobian variation of a problem
//! around its solution. Three forms are supported:
//!
//! * `Hoelder { k, p, radius }` — ψ(t) = K·t^{p+1}/(p+1) − t,
//! * `Smale { gamma }`          — ψ(t) = t/(1 − γt) − 2t on [0, 1/γ),
//! * `Custom`                   — any user evaluator returning (ψ, ψ', ψ″).
//!
//! The scalar modulus λ rides along with the form; for the Hölder form the
//! constant K already absorbs λ (the Lipschitz case is K = λ·L with p = 1).

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Tolerance for the pointwise h1 check (values at t = 0).
pub const H1_TOL: f64 = 1e-12;

/// Absolute bisection tolerance in t used for custom-form radii.
pub const BISECTION_TOL: f64 = 1e-12;

/// Number of points in the default verification grid.
pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Error)]
pub enum MajorantError {
    #[error("invalid majorant constants: {0}")]
    InvalidConstants(String),
    #[error("t = {t} outside the majorant domain [0, {radius})")]
    OutOfDomain { t: f64, radius: f64 },
    #[error("psi'({t}) = {dpsi:e} is nonnegative; Newton map undefined at or beyond nu")]
    BeyondNu { t: f64, dpsi: f64 },
    #[error("t0 = {t0} is not inside the contraction interval (0, rho = {rho})")]
    StartOutsideContraction { t0: f64, rho: f64 },
    #[error("radius {which} undetermined: no sign change on ({lo:e}, {hi:e})")]
    RadiusUndetermined { which: &'static str, lo: f64, hi: f64 },
    #[error("axiom {axiom} fails at t = {t:e}")]
    AxiomViolation { axiom: &'static str, t: f64 },
    #[error("invalid verification grid: {0}")]
    InvalidGrid(String),
}

/// Evaluator type for custom majorants: t ↦ (ψ(t), ψ'(t), ψ″(t)).
pub type PsiEvaluator = Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>;

#[derive(Clone)]
pub enum MajorantForm {
    Hoelder { k: f64, p: f64, radius: f64 },
    Smale { gamma: f64 },
    Custom { eval: PsiEvaluator, radius: f64 },
}

impl fmt::Debug for MajorantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MajorantForm::Hoelder { k, p, radius } => f
                .debug_struct("Hoelder")
                .field("k", k)
                .field("p", p)
                .field("radius", radius)
                .finish(),
            MajorantForm::Smale { gamma } => {
                f.debug_struct("Smale").field("gamma", gamma).finish()
            }
            MajorantForm::Custom { radius, .. } => {
                f.debug_struct("Custom").field("radius", radius).finish()
            }
        }
    }
}

/// Value of ψ and its first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValues {
    pub psi: f64,
    pub dpsi: f64,
    pub ddpsi: f64,
}

/// The certified radii of a majorant.
///
/// `nu` bounds where ψ' stays negative, `rho` is the contraction radius of
/// the scalar Newton map, `sigma` bounds the uniqueness ball, and
/// `r = min(kappa, rho)` is the certified convergence radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusReport {
    pub nu: f64,
    pub rho: f64,
    pub sigma: f64,
    pub r: f64,
    pub kappa: f64,
}

/// Result of one axiom check: pass flag plus the first violating grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomCheck {
    pub pass: bool,
    pub first_violation: Option<f64>,
}

impl AxiomCheck {
    fn ok() -> Self {
        AxiomCheck { pass: true, first_violation: None }
    }

    fn fail(t: f64) -> Self {
        AxiomCheck { pass: false, first_violation: Some(t) }
    }
}

/// Grid verification verdicts for the majorant axioms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomReport {
    /// ψ(0) = 0 and ψ'(0) = −1.
    pub h1: AxiomCheck,
    /// ψ' strictly increasing on the grid.
    pub h2: AxiomCheck,
    /// t ↦ [ψ(t)/ψ'(t) − t]/t^{p+1} strictly increasing, for the given p.
    pub h3: AxiomCheck,
    /// Central finite differences of ψ reproduce ψ' (C² consistency).
    pub smoothness: AxiomCheck,
}

impl AxiomReport {
    pub fn pass(&self) -> bool {
        self.h1.pass && self.h2.pass && self.h3.pass && self.smoothness.pass
    }
}

/// Majorizing-sequence evolution together with rate diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEnvelope {
    pub sequence: Vec<f64>,
    /// Ratios t_{k+1} / t_k^{p+1}.
    pub ratios: Vec<f64>,
    /// ψ″(t₀) / (2·|ψ'(t₀)|), available when p = 1.
    pub quadratic_bound: Option<f64>,
}

/// A scalar majorant function with its strong-regularity modulus λ.
#[derive(Debug, Clone)]
pub struct MajorantSpec {
    lambda: f64,
    form: MajorantForm,
}

fn require(cond: bool, msg: &str) -> Result<(), MajorantError> {
    if cond {
        Ok(())
    } else {
        Err(MajorantError::InvalidConstants(msg.to_string()))
    }
}

impl MajorantSpec {
    pub fn hoelder(lambda: f64, k: f64, p: f64, radius: f64) -> Result<Self, MajorantError> {
        require(lambda > 0.0 && lambda.is_finite(), "lambda must be positive and finite")?;
        require(k > 0.0 && k.is_finite(), "K must be positive and finite")?;
        require(p > 0.0 && p <= 1.0, "p must lie in (0, 1]")?;
        require(radius > 0.0, "R must be positive (may be +inf)")?;
        Ok(MajorantSpec { lambda, form: MajorantForm::Hoelder { k, p, radius } })
    }

    pub fn smale(lambda: f64, gamma: f64) -> Result<Self, MajorantError> {
        require(lambda > 0.0 && lambda.is_finite(), "lambda must be positive and finite")?;
        require(gamma > 0.0 && gamma.is_finite(), "gamma must be positive and finite")?;
        Ok(MajorantSpec { lambda, form: MajorantForm::Smale { gamma } })
    }

    pub fn custom(lambda: f64, radius: f64, eval: PsiEvaluator) -> Result<Self, MajorantError> {
        require(lambda > 0.0 && lambda.is_finite(), "lambda must be positive and finite")?;
        require(radius > 0.0 && radius.is_finite(), "custom R must be positive and finite")?;
        Ok(MajorantSpec { lambda, form: MajorantForm::Custom { eval, radius } })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn form(&self) -> &MajorantForm {
        &self.form
    }

    /// Domain end R of ψ (possibly +∞ for the Hölder form).
    pub fn domain_radius(&self) -> f64 {
        match &self.form {
            MajorantForm::Hoelder { radius, .. } => *radius,
            MajorantForm::Smale { gamma } => 1.0 / gamma,
            MajorantForm::Custom { radius, .. } => *radius,
        }
    }

    /// Exponent used for the rate inequality: the Hölder p, else 1.
    pub fn rate_exponent(&self) -> f64 {
        match &self.form {
            MajorantForm::Hoelder { p, .. } => *p,
            _ => 1.0,
        }
    }

    /// ψ and its first two derivatives at t ∈ [0, R).
    pub fn eval(&self, t: f64) -> Result<PsiValues, MajorantError> {
        let radius = self.domain_radius();
        if !(t >= 0.0) || t >= radius {
            return Err(MajorantError::OutOfDomain { t, radius });
        }
        Ok(match &self.form {
            MajorantForm::Hoelder { k, p, .. } => {
                if *p == 1.0 {
                    // Quadratic closed form kept in plain arithmetic so that
                    // fixed points of the scalar Newton map are reproduced
                    // bit-for-bit by the vector iteration.
                    PsiValues { psi: 0.5 * k * t * t - t, dpsi: k * t - 1.0, ddpsi: *k }
                } else {
                    let ddpsi = if t == 0.0 { f64::INFINITY } else { k * p * t.powf(p - 1.0) };
                    PsiValues {
                        psi: k * t.powf(p + 1.0) / (p + 1.0) - t,
                        dpsi: k * t.powf(*p) - 1.0,
                        ddpsi,
                    }
                }
            }
            MajorantForm::Smale { gamma } => {
                let s = 1.0 - gamma * t;
                PsiValues {
                    psi: t / s - 2.0 * t,
                    dpsi: 1.0 / (s * s) - 2.0,
                    ddpsi: 2.0 * gamma / (s * s * s),
                }
            }
            MajorantForm::Custom { eval, .. } => {
                let (psi, dpsi, ddpsi) = eval(t);
                PsiValues { psi, dpsi, ddpsi }
            }
        })
    }

    /// The scalar Newton map n_ψ(t) = t − ψ(t)/ψ'(t), defined while ψ'(t) < 0.
    pub fn newton_map(&self, t: f64) -> Result<f64, MajorantError> {
        let v = self.eval(t)?;
        if v.dpsi >= 0.0 {
            return Err(MajorantError::BeyondNu { t, dpsi: v.dpsi });
        }
        Ok(t - v.psi / v.dpsi)
    }

    /// Scalar linearization error e_ψ(t, u) = ψ(u) − [ψ(t) + ψ'(t)(u − t)].
    pub fn linearization_error(&self, t: f64, u: f64) -> Result<f64, MajorantError> {
        let at_t = self.eval(t)?;
        let at_u = self.eval(u)?;
        Ok(at_u.psi - (at_t.psi + at_t.dpsi * (u - t)))
    }

    /// Contraction radius ρ (computed with κ = +∞).
    pub fn rho(&self) -> Result<f64, MajorantError> {
        Ok(self.radii(f64::INFINITY)?.rho)
    }

    /// The radii ν, ρ, σ and r = min(κ, ρ).
    ///
    /// Hölder and Smale forms use closed forms; custom forms realize each
    /// supremum as the root of its boundary equality by bisection
    /// (ψ' = 0, ψ = 2tψ', ψ = 0) to `BISECTION_TOL` in t.
    pub fn radii(&self, kappa: f64) -> Result<RadiusReport, MajorantError> {
        require(kappa > 0.0, "kappa must be positive")?;
        self.check_h1()?;
        let domain = self.domain_radius();
        let (nu, rho, zero) = match &self.form {
            MajorantForm::Hoelder { k, p, .. } => {
                let (nu, rho, zero) = if *p == 1.0 {
                    (1.0 / k, 2.0 / (3.0 * k), 2.0 / k)
                } else {
                    (
                        (1.0 / k).powf(1.0 / p),
                        ((p + 1.0) / ((2.0 * p + 1.0) * k)).powf(1.0 / p),
                        ((p + 1.0) / k).powf(1.0 / p),
                    )
                };
                (nu.min(domain), rho.min(domain), zero.min(domain))
            }
            MajorantForm::Smale { gamma } => {
                let sqrt2 = 2.0_f64.sqrt();
                (
                    (sqrt2 - 1.0) / (sqrt2 * gamma),
                    (5.0 - 17.0_f64.sqrt()) / (4.0 * gamma),
                    1.0 / (2.0 * gamma),
                )
            }
            MajorantForm::Custom { .. } => {
                let lo = 1e-12;
                let hi = domain - 1e-12;
                let nu = self.bisect_root("nu", lo, hi, |v| v.dpsi)?;
                let rho = self.bisect_root_t("rho", lo, nu - 1e-12, |t, v| {
                    -(v.psi - 2.0 * t * v.dpsi)
                })?;
                let zero = self.bisect_root("sigma", lo, kappa.min(domain) - 1e-12, |v| v.psi)?;
                (nu, rho, zero)
            }
        };
        let rho = rho.min(nu);
        let sigma = zero.min(kappa);
        Ok(RadiusReport { nu, rho, sigma, r: kappa.min(rho), kappa })
    }

    fn check_h1(&self) -> Result<(), MajorantError> {
        let v0 = self.eval(0.0)?;
        if v0.psi.abs() > H1_TOL || (v0.dpsi + 1.0).abs() > H1_TOL {
            return Err(MajorantError::AxiomViolation { axiom: "h1", t: 0.0 });
        }
        Ok(())
    }

    fn bisect_root(
        &self,
        which: &'static str,
        lo: f64,
        hi: f64,
        f: impl Fn(PsiValues) -> f64,
    ) -> Result<f64, MajorantError> {
        self.bisect_root_t(which, lo, hi, |_, v| f(v))
    }

    fn bisect_root_t(
        &self,
        which: &'static str,
        lo: f64,
        hi: f64,
        f: impl Fn(f64, PsiValues) -> f64,
    ) -> Result<f64, MajorantError> {
        let undetermined = MajorantError::RadiusUndetermined { which, lo, hi };
        if !(lo < hi) {
            return Err(undetermined);
        }
        let eval_at = |t: f64| self.eval(t).map(|v| f(t, v));
        let mut a = lo;
        let mut b = hi;
        let mut fa = eval_at(a).map_err(|_| MajorantError::RadiusUndetermined { which, lo, hi })?;
        let fb = eval_at(b).map_err(|_| MajorantError::RadiusUndetermined { which, lo, hi })?;
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.signum() == fb.signum() {
            return Err(undetermined);
        }
        while b - a > BISECTION_TOL {
            let mid = 0.5 * (a + b);
            let fm = eval_at(mid).map_err(|_| MajorantError::RadiusUndetermined { which, lo, hi })?;
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Majorizing sequence t₀, t₁, … with t_{k+1} = |t_k − ψ(t_k)/ψ'(t_k)|.
    ///
    /// Requires t₀ ∈ (0, ρ). Stops after `max_steps` steps or once the last
    /// element drops below `tol`.
    pub fn majorizing_sequence(
        &self,
        t0: f64,
        max_steps: usize,
        tol: f64,
    ) -> Result<Vec<f64>, MajorantError> {
        let rho = self.rho()?;
        if !(t0 > 0.0) || t0 >= rho {
            return Err(MajorantError::StartOutsideContraction { t0, rho });
        }
        let mut seq = vec![t0];
        let mut t = t0;
        for _ in 0..max_steps {
            if t < tol {
                break;
            }
            t = self.newton_map(t)?.abs();
            seq.push(t);
            if t == 0.0 {
                break;
            }
        }
        Ok(seq)
    }

    /// Sequence ratios t_{k+1}/t_k^{p+1} plus the p = 1 quadratic bound.
    ///
    /// Verifies h3 for the requested exponent on the default grid first and
    /// reports the violating t if the check fails.
    pub fn rate_envelope(
        &self,
        t0: f64,
        p: f64,
        max_steps: usize,
    ) -> Result<RateEnvelope, MajorantError> {
        let grid = self.default_grid()?;
        let report = self.verify_axioms(&grid, p)?;
        if !report.h3.pass {
            return Err(MajorantError::AxiomViolation {
                axiom: "h3",
                t: report.h3.first_violation.unwrap_or(f64::NAN),
            });
        }
        let sequence = self.majorizing_sequence(t0, max_steps, 0.0)?;
        let mut ratios = Vec::new();
        for w in sequence.windows(2) {
            let denom = w[0].powf(p + 1.0);
            if denom == 0.0 || !denom.is_finite() {
                break;
            }
            ratios.push(w[1] / denom);
        }
        let quadratic_bound = if p == 1.0 {
            let v0 = self.eval(t0)?;
            Some(v0.ddpsi / (2.0 * v0.dpsi.abs()))
        } else {
            None
        };
        Ok(RateEnvelope { sequence, ratios, quadratic_bound })
    }

    /// Default verification grid: 0 plus `DEFAULT_GRID_POINTS` log-spaced
    /// points accumulating near 0 inside (0, ν). The lower end stays at
    /// ν·1e−5; below that the h3 quantity is dominated by cancellation
    /// noise rather than by the function itself.
    pub fn default_grid(&self) -> Result<Vec<f64>, MajorantError> {
        let nu = self.radii_nu()?;
        let lo = nu * 1e-5;
        let hi = nu * (1.0 - 1e-6);
        let m = DEFAULT_GRID_POINTS;
        let mut grid = Vec::with_capacity(m + 1);
        grid.push(0.0);
        for i in 0..m {
            let u = i as f64 / (m - 1) as f64;
            grid.push(lo.powf(1.0 - u) * hi.powf(u));
        }
        Ok(grid)
    }

    fn radii_nu(&self) -> Result<f64, MajorantError> {
        Ok(self.radii(f64::INFINITY)?.nu)
    }

    /// Checks h1, h2, h3(p) and C² evaluator consistency on a grid.
    ///
    /// The grid must be strictly sorted, have at least 16 points, and stay
    /// inside [0, ν). Failures are reported, not raised.
    pub fn verify_axioms(&self, grid: &[f64], p: f64) -> Result<AxiomReport, MajorantError> {
        if grid.len() < 16 {
            return Err(MajorantError::InvalidGrid(format!(
                "need at least 16 grid points, got {}",
                grid.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(MajorantError::InvalidGrid("grid must be strictly increasing".into()));
        }
        if grid[0] < 0.0 {
            return Err(MajorantError::InvalidGrid("grid must start at or above 0".into()));
        }
        let values: Vec<(f64, PsiValues)> = grid
            .iter()
            .map(|&t| self.eval(t).map(|v| (t, v)))
            .collect::<Result<_, _>>()?;

        let v0 = self.eval(0.0)?;
        let h1 = if v0.psi.abs() <= H1_TOL && (v0.dpsi + 1.0).abs() <= H1_TOL {
            AxiomCheck::ok()
        } else {
            AxiomCheck::fail(0.0)
        };

        let mut h2 = AxiomCheck::ok();
        for w in values.windows(2) {
            if !(w[1].1.dpsi > w[0].1.dpsi) {
                h2 = AxiomCheck::fail(w[1].0);
                break;
            }
        }

        // h3 lives on (0, nu); points where psi' has already reached 0 are
        // outside that interval and are skipped.
        let mut h3 = AxiomCheck::ok();
        let mut prev: Option<f64> = None;
        for &(t, v) in &values {
            if t <= 0.0 || v.dpsi == 0.0 {
                continue;
            }
            let s = (v.psi / v.dpsi - t) / t.powf(p + 1.0);
            if let Some(sp) = prev {
                if !(s > sp) {
                    h3 = AxiomCheck::fail(t);
                    break;
                }
            }
            prev = Some(s);
        }

        let smoothness = self.check_smoothness(&values);

        Ok(AxiomReport { h1, h2, h3, smoothness })
    }

    /// |ψ'(t) − (ψ(t+h) − ψ(t−h))/(2h)| ≤ c·h² with c scaled by an estimate
    /// of ψ‴ from the evaluator's own ψ″ values.
    fn check_smoothness(&self, values: &[(f64, PsiValues)]) -> AxiomCheck {
        let radius = self.domain_radius();
        for &(t, v) in values {
            let h = (1e-4 * t.max(1.0)).min(0.5 * t);
            if h <= 0.0 || t + h >= radius {
                continue;
            }
            let (lo, hi) = match (self.eval(t - h), self.eval(t + h)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            let fd_first = (hi.psi - lo.psi) / (2.0 * h);
            let fd_third = (hi.ddpsi - lo.ddpsi) / (2.0 * h);
            let tol = h * h * (10.0 + fd_third.abs()) + 1e-14 * (1.0 + v.psi.abs()) / h;
            if (v.dpsi - fd_first).abs() > tol {
                return AxiomCheck::fail(t);
            }
        }
        AxiomCheck::ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hoelder11() -> MajorantSpec {
        MajorantSpec::hoelder(1.0, 1.0, 1.0, f64::INFINITY).unwrap()
    }

    fn smale1() -> MajorantSpec {
        MajorantSpec::smale(1.0, 1.0).unwrap()
    }

    // Closed-form sequence recurrences used as independent oracles.
    fn hoelder_step(k: f64, p: f64, t: f64) -> f64 {
        k * p * t.powf(p + 1.0) / ((p + 1.0) * (1.0 - k * t.powf(p)))
    }

    fn smale_step(gamma: f64, t: f64) -> f64 {
        gamma * t * t / (2.0 * (1.0 - gamma * t).powi(2) - 1.0)
    }

    #[test]
    fn eval_at_origin() {
        let s = smale1().eval(0.0).unwrap();
        assert_eq!((s.psi, s.dpsi, s.ddpsi), (0.0, -1.0, 2.0));
        let h = hoelder11().eval(0.0).unwrap();
        assert_eq!((h.psi, h.dpsi, h.ddpsi), (0.0, -1.0, 1.0));
    }

    #[test]
    fn eval_hoelder_interior() {
        let v = hoelder11().eval(0.5).unwrap();
        assert_eq!((v.psi, v.dpsi, v.ddpsi), (-0.375, -0.5, 1.0));
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        assert!(matches!(smale1().eval(1.0), Err(MajorantError::OutOfDomain { .. })));
        assert!(matches!(smale1().eval(-0.1), Err(MajorantError::OutOfDomain { .. })));
    }

    #[test]
    fn newton_map_values() {
        let m = hoelder11();
        assert_eq!(m.newton_map(0.0).unwrap(), 0.0);
        assert_eq!(m.newton_map(0.5).unwrap(), -0.25);
        let rho = m.rho().unwrap();
        let n = m.newton_map(rho).unwrap();
        assert!((n + rho).abs() <= 1e-15, "n_psi(rho) = {n}, expected -rho = {}", -rho);
    }

    #[test]
    fn newton_map_rejects_beyond_nu() {
        assert!(matches!(hoelder11().newton_map(1.0), Err(MajorantError::BeyondNu { .. })));
    }

    #[test]
    fn sequence_matches_closed_recurrence() {
        let seq = hoelder11().majorizing_sequence(0.5, 16, 1e-6).unwrap();
        let mut expect = vec![0.5];
        while *expect.last().unwrap() >= 1e-6 && expect.len() < 17 {
            expect.push(hoelder_step(1.0, 1.0, *expect.last().unwrap()));
        }
        assert_eq!(seq.len(), expect.len());
        for (a, b) in seq.iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b), "{a} vs {b}");
        }
        // frozen prefix from the recurrence
        assert!((seq[1] - 0.25).abs() < 1e-6);
        assert!((seq[2] - 0.0416667).abs() < 1e-6);
        assert!((seq[3] - 0.00090580).abs() < 1e-6);
    }

    #[test]
    fn sequence_matches_smale_recurrence() {
        let seq = smale1().majorizing_sequence(0.1, 16, 1e-8).unwrap();
        let mut t = 0.1;
        for (k, &v) in seq.iter().enumerate() {
            if k > 0 {
                t = smale_step(1.0, t);
            }
            assert!((v - t).abs() <= 1e-12 * (1.0 + t));
        }
        assert!((seq[1] - 0.0161290).abs() / 0.0161290 < 1e-4);
        assert!((seq[2] - 0.00027795).abs() / 0.00027795 < 1e-4);
    }

    #[test]
    fn sequence_requires_contraction_start() {
        let m = hoelder11();
        let rho = m.rho().unwrap();
        assert!(matches!(
            m.majorizing_sequence(rho, 8, 0.0),
            Err(MajorantError::StartOutsideContraction { .. })
        ));
    }

    #[test]
    fn newton_map_vanishes_superlinearly_near_zero() {
        for spec in [hoelder11(), smale1()] {
            let mut prev = f64::INFINITY;
            for &t in &[1e-2, 1e-4, 1e-6] {
                let q = spec.newton_map(t).unwrap().abs() / t;
                assert!(q < prev);
                prev = q;
            }
            assert!(prev < 1e-5, "|n_psi(t)|/t should vanish, got {prev}");
        }
    }

    #[test]
    fn radii_closed_forms() {
        let r = hoelder11().radii(10.0).unwrap();
        assert!((r.nu - 1.0).abs() < 1e-15);
        assert!((r.rho - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.sigma - 2.0).abs() < 1e-15);
        assert!((r.r - 2.0 / 3.0).abs() < 1e-15);

        let s = smale1().radii(f64::INFINITY).unwrap();
        assert!((s.rho - (5.0 - 17.0_f64.sqrt()) / 4.0).abs() < 1e-15);
        assert!((s.nu - (2.0_f64.sqrt() - 1.0) / 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((s.sigma - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radii_boundary_identity() {
        // at rho the contraction boundary equality psi/(rho psi') - 1 = 1 holds
        for spec in [
            hoelder11(),
            MajorantSpec::hoelder(1.0, 2.5, 0.5, f64::INFINITY).unwrap(),
            MajorantSpec::smale(1.0, 0.7).unwrap(),
        ] {
            let rho = spec.rho().unwrap();
            let v = spec.eval(rho).unwrap();
            let lhs = v.psi / (rho * v.dpsi) - 1.0;
            assert!((lhs - 1.0).abs() < 1e-10, "boundary identity off: {lhs}");
        }
    }

    #[test]
    fn custom_bisection_matches_closed_form() {
        // Hölder K=1, p=0.5 expressed as a custom evaluator
        let eval: PsiEvaluator = Arc::new(|t: f64| {
            let k = 1.0;
            let p = 0.5;
            (
                k * t.powf(p + 1.0) / (p + 1.0) - t,
                k * t.powf(p) - 1.0,
                if t == 0.0 { f64::INFINITY } else { k * p * t.powf(p - 1.0) },
            )
        });
        let custom = MajorantSpec::custom(1.0, 10.0, eval).unwrap();
        let r = custom.radii(10.0).unwrap();
        assert!((r.rho - 0.5625).abs() < 1e-8, "rho = {}", r.rho);
        assert!((r.nu - 1.0).abs() < 1e-8);
        assert!((r.sigma - 2.25).abs() < 1e-8);
    }

    #[test]
    fn custom_without_sign_change_is_undetermined() {
        // psi' never reaches 0 on [0, R): nu has no bracketing root
        let eval: PsiEvaluator = Arc::new(|t: f64| (0.01 * t * t - t, 0.02 * t - 1.0, 0.02));
        let custom = MajorantSpec::custom(1.0, 2.0, eval).unwrap();
        match custom.radii(2.0) {
            Err(MajorantError::RadiusUndetermined { which, .. }) => assert_eq!(which, "nu"),
            other => panic!("expected undetermined nu, got {other:?}"),
        }
    }

    #[test]
    fn rate_envelope_hoelder() {
        let env = hoelder11().rate_envelope(0.5, 1.0, 24).unwrap();
        assert_eq!(env.quadratic_bound, Some(1.0));
        assert!((env.ratios[0] - 1.0).abs() < 1e-15);
        for w in env.ratios.windows(2) {
            assert!(w[1] < w[0], "ratios must strictly decrease: {:?}", env.ratios);
        }
        for &r in &env.ratios {
            assert!(r <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn rate_envelope_smale() {
        let env = smale1().rate_envelope(0.1, 1.0, 24).unwrap();
        let first = 1.0 / 0.62;
        assert!((env.ratios[0] - first).abs() < 1e-12);
        for &r in &env.ratios {
            assert!(r <= first + 1e-12);
        }
        let qb = env.quadratic_bound.unwrap();
        for &r in &env.ratios {
            assert!(r <= qb + 1e-12);
        }
    }

    #[test]
    fn axioms_hold_for_standard_forms() {
        for spec in [hoelder11(), smale1()] {
            let grid = spec.default_grid().unwrap();
            let report = spec.verify_axioms(&grid, 1.0).unwrap();
            assert!(report.pass(), "{report:?}");
        }
    }

    #[test]
    fn axioms_flag_h1_violation() {
        // psi(t) = t^2 has psi'(0) = 0 instead of -1
        let eval: PsiEvaluator = Arc::new(|t: f64| (t * t, 2.0 * t, 2.0));
        let custom = MajorantSpec::custom(1.0, 1.0, eval).unwrap();
        let grid: Vec<f64> = (0..32).map(|i| i as f64 * 0.007).collect();
        let report = custom.verify_axioms(&grid, 1.0).unwrap();
        assert!(!report.h1.pass);
        assert_eq!(report.h1.first_violation, Some(0.0));
        match custom.radii(1.0) {
            Err(MajorantError::AxiomViolation { axiom, .. }) => assert_eq!(axiom, "h1"),
            other => panic!("expected h1 violation, got {other:?}"),
        }
    }

    #[test]
    fn axioms_flag_inconsistent_derivative() {
        // evaluator lies about psi': finite differences expose it
        let eval: PsiEvaluator =
            Arc::new(|t: f64| (0.5 * t * t - t, 1.2 * t - 1.0 - 0.01, 1.2));
        let custom = MajorantSpec::custom(1.0, 0.8, eval).unwrap();
        let grid: Vec<f64> = (0..64).map(|i| 1e-4 + i as f64 * 0.01).collect();
        let report = custom.verify_axioms(&grid, 1.0).unwrap();
        assert!(!report.smoothness.pass);
    }

    #[test]
    fn linearization_error_values() {
        let h = hoelder11();
        assert_eq!(h.linearization_error(0.3, 0.3).unwrap(), 0.0);
        assert!((h.linearization_error(0.5, 0.0).unwrap() - 0.125).abs() < 1e-15);
        let s = smale1();
        assert!((s.linearization_error(0.1, 0.0).unwrap() - 0.0123457).abs() < 1e-7);
        // identity e_psi(t,0)/|psi'(t)| = |n_psi(t)| on a grid
        for spec in [hoelder11(), smale1()] {
            let nu = spec.radii(f64::INFINITY).unwrap().nu;
            for i in 1..40 {
                let t = nu * i as f64 / 41.0;
                let e = spec.linearization_error(t, 0.0).unwrap();
                let v = spec.eval(t).unwrap();
                let n = spec.newton_map(t).unwrap().abs();
                assert!((e / v.dpsi.abs() - n).abs() <= 1e-12 * (1.0 + n));
            }
        }
    }

    #[test]
    fn constructor_rejects_bad_constants() {
        assert!(MajorantSpec::hoelder(0.0, 1.0, 1.0, f64::INFINITY).is_err());
        assert!(MajorantSpec::hoelder(1.0, -1.0, 1.0, f64::INFINITY).is_err());
        assert!(MajorantSpec::hoelder(1.0, 1.0, 1.5, f64::INFINITY).is_err());
        assert!(MajorantSpec::smale(1.0, 0.0).is_err());
    }
}
