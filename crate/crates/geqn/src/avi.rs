//! The Newton subproblem: an affine variational inequality q + Mz + F(z) ∋ 0
//! built by partial linearization, solved by complementary pivoting with
//! desk-scale enumeration oracles, plus the strong-regularity modulus of the
//! linearized inclusion at a solution.

use thiserror::Error;

use crate::linalg::{self, norm2, LuFactors, Mat};
use crate::problem::{ProblemError, ProblemInstance, SetDescriptor};

/// Dimension cap for the 2ⁿ complementary index-set enumeration.
pub const MAX_ENUMERATION_DIM: usize = 12;

/// Dimension cap for the 3ⁿ box face enumeration.
pub const MAX_BOX_DIM: usize = 8;

/// Default classification threshold for active-set degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum AviError {
    #[error("invalid subproblem: {0}")]
    Invalid(String),
    #[error("linear part is singular")]
    SingularMatrix,
    #[error("subproblem unsolved: pivoting ended with {status:?} and no enumeration fallback")]
    SubproblemUnsolved { status: LcpStatus },
    #[error("subproblem has no solution")]
    NoSolution,
    #[error("no localized solution inside the requested ball")]
    NoLocalizedSolution,
    #[error("dimension {n} exceeds the enumeration cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("point is not a solution of the subproblem (residual {residual:.2e})")]
    NotSolution { residual: f64 },
    #[error("not strongly regular — piece singular ({piece})")]
    PieceSingular { piece: String },
    #[error("active-constraint multiplier undetermined (rank-deficient active rows)")]
    MultiplierUndetermined,
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Copositive-pivot outcome classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcpStatus {
    Solved,
    RayTermination,
    CycleGuardTripped,
}

/// Result of a Lemke run. A `Solved` result satisfies z ≥ −1e−10,
/// Mz + q ≥ −1e−10 and |zᵀ(Mz+q)| ≤ 1e−8·(1+‖q‖) on the tested classes.
#[derive(Debug, Clone)]
pub struct LcpResult {
    pub status: LcpStatus,
    pub z: Option<Vec<f64>>,
    pub pivots: usize,
}

/// All solutions found by complementary index-set enumeration, plus the
/// index sets skipped because their principal block was singular.
#[derive(Debug, Clone)]
pub struct LcpEnumeration {
    pub solutions: Vec<Vec<f64>>,
    pub skipped_singular: Vec<u32>,
}

/// One Newton subproblem: the inclusion q + Mz + F(z) ∋ 0 with
/// M = f'(x) and q = f(x) − f'(x)x.
#[derive(Debug, Clone)]
pub struct Avi {
    m: Mat,
    q: Vec<f64>,
    set: SetDescriptor,
}

/// Solution of a subproblem together with how many candidate solutions the
/// solver saw (more than one signals a set-valued Newton step).
#[derive(Debug, Clone)]
pub struct AviSolution {
    pub z: Vec<f64>,
    pub candidates: usize,
}

/// Options for the strong-regularity modulus computation.
#[derive(Debug, Clone, Copy)]
pub struct ModulusOptions {
    /// Below this, a complementarity pair counts as degenerate.
    pub degeneracy_tol: f64,
    /// Residual tolerance for accepting `xstar` as a subproblem solution.
    pub residual_tol: f64,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        ModulusOptions { degeneracy_tol: DEGENERACY_TOL, residual_tol: 1e-8 }
    }
}

/// Default pivot cap 10·2ⁿ (saturated for large n).
pub fn default_max_pivots(n: usize) -> usize {
    10usize.saturating_mul(1usize << n.min(24))
}

impl Avi {
    pub fn new(m: Mat, q: Vec<f64>, set: SetDescriptor) -> Result<Self, AviError> {
        if !m.is_square() || m.rows() != q.len() {
            return Err(AviError::Invalid(format!(
                "M is {}x{} with q of length {}",
                m.rows(),
                m.cols(),
                q.len()
            )));
        }
        set.validate(q.len())?;
        Ok(Avi { m, q, set })
    }

    /// Partial linearization of a problem at x: M = f'(x), q = f(x) − f'(x)x.
    /// Solving the resulting inclusion is exactly one Newton step.
    pub fn linearize(problem: &ProblemInstance, x: &[f64]) -> Self {
        let m = problem.jac(x);
        let fx = problem.f(x);
        let mx = m.matvec(x);
        let q = (0..problem.dim()).map(|i| fx[i] - mx[i]).collect();
        Avi { m, q, set: problem.set().clone() }
    }

    pub fn m(&self) -> &Mat {
        &self.m
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn set(&self) -> &SetDescriptor {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Natural residual of the affine inclusion at z.
    pub fn residual(&self, z: &[f64]) -> Result<f64, AviError> {
        let w = linalg::add_vec(&self.m.matvec(z), &self.q);
        match &self.set {
            SetDescriptor::ZeroMap => Ok(norm2(&w)),
            set => {
                let projected = set.project(&linalg::sub_vec(z, &w))?;
                Ok(linalg::dist2(z, &projected))
            }
        }
    }

    /// Solves the subproblem. When several solutions exist the one nearest
    /// the hint is returned (ties broken lexicographically); `localization`
    /// restricts admissible solutions to a closed ball.
    pub fn solve(
        &self,
        hint: &[f64],
        localization: Option<(&[f64], f64)>,
    ) -> Result<AviSolution, AviError> {
        let n = self.dim();
        if hint.len() != n {
            return Err(AviError::Invalid("hint length mismatch".into()));
        }
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        match &self.set {
            SetDescriptor::ZeroMap => {
                // Solve for the step anchored at the hint: M·δ = −(M·hint + q).
                // Equivalent to Mz = −q but keeps late Newton steps free of
                // the cancellation in forming q − M picks up near a root.
                let lu = LuFactors::factor(&self.m).map_err(|_| AviError::SingularMatrix)?;
                let mh = linalg::add_vec(&self.m.matvec(hint), &self.q);
                let rhs: Vec<f64> = mh.iter().map(|v| -v).collect();
                let delta = lu.solve(&rhs);
                candidates.push(linalg::add_vec(hint, &delta));
            }
            SetDescriptor::Orthant(_) => {
                let lem = lemke(&self.m, &self.q, default_max_pivots(n))?;
                if let Some(z) = &lem.z {
                    candidates.push(z.clone());
                }
                if n <= MAX_ENUMERATION_DIM {
                    candidates.extend(lcp_enumerate(&self.m, &self.q)?.solutions);
                } else if lem.status != LcpStatus::Solved {
                    return Err(AviError::SubproblemUnsolved { status: lem.status });
                }
            }
            SetDescriptor::Box { .. } => {
                candidates.extend(self.enumerate_box_solutions()?);
            }
            SetDescriptor::Polyhedron { .. } => {
                let mut solved = false;
                if let Ok(red) = self.polyhedron_to_lcp() {
                    let m_rows = red.m_prime.rows();
                    if let Ok(lem) = lemke(&red.m_prime, &red.q_prime, default_max_pivots(m_rows)) {
                        if let Some(mu) = &lem.z {
                            candidates.push(red.recover(mu));
                            solved = true;
                        }
                    }
                }
                if !solved {
                    candidates.extend(self.enumerate_polyhedron_solutions()?);
                }
            }
        }
        dedup_points(&mut candidates);
        if candidates.is_empty() {
            return Err(AviError::NoSolution);
        }
        if let Some((center, radius)) = localization {
            candidates.retain(|z| linalg::dist2(z, center) <= radius);
            if candidates.is_empty() {
                return Err(AviError::NoLocalizedSolution);
            }
        }
        let count = candidates.len();
        candidates.sort_by(|a, b| {
            let da = linalg::dist2(a, hint);
            let db = linalg::dist2(b, hint);
            da.total_cmp(&db).then_with(|| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        Ok(AviSolution { z: candidates.swap_remove(0), candidates: count })
    }

    /// All box-constrained solutions by face enumeration: each coordinate is
    /// fixed at its lower bound, left free, or fixed at its upper bound; the
    /// free block is solved and normal-cone sign conditions checked
    /// (w_i ≥ −1e−10 at lower bounds, w_i ≤ 1e−10 at upper bounds).
    pub fn enumerate_box_solutions(&self) -> Result<Vec<Vec<f64>>, AviError> {
        let (lower, upper) = match &self.set {
            SetDescriptor::Box { lower, upper } => (lower, upper),
            _ => return Err(AviError::Invalid("box enumeration needs a box set".into())),
        };
        let n = self.dim();
        if n > MAX_BOX_DIM {
            return Err(AviError::TooLarge { n, cap: MAX_BOX_DIM });
        }
        let tol = 1e-10;
        let mut out: Vec<Vec<f64>> = Vec::new();
        let mut assignment = vec![0u8; n]; // 0 = lower, 1 = free, 2 = upper
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            for slot in assignment.iter_mut() {
                *slot = (c % 3) as u8;
                c /= 3;
            }
            if assignment
                .iter()
                .enumerate()
                .any(|(i, &a)| (a == 0 && lower[i].is_infinite()) || (a == 2 && upper[i].is_infinite()))
            {
                continue;
            }
            let free: Vec<usize> = (0..n).filter(|&i| assignment[i] == 1).collect();
            let mut z = vec![0.0; n];
            for i in 0..n {
                z[i] = match assignment[i] {
                    0 => lower[i],
                    2 => upper[i],
                    _ => 0.0,
                };
            }
            if !free.is_empty() {
                let m_ff = self.m.submatrix(&free, &free);
                let mut rhs: Vec<f64> = free.iter().map(|&i| -self.q[i]).collect();
                for (k, &i) in free.iter().enumerate() {
                    for j in 0..n {
                        if assignment[j] != 1 {
                            rhs[k] -= self.m[(i, j)] * z[j];
                        }
                    }
                }
                let zf = match linalg::solve_linear(&m_ff, &rhs) {
                    Ok(zf) => zf,
                    Err(_) => continue, // singular free block: skipped
                };
                for (k, &i) in free.iter().enumerate() {
                    z[i] = zf[k];
                }
            }
            let inside = free
                .iter()
                .all(|&i| z[i] >= lower[i] - tol && z[i] <= upper[i] + tol);
            if !inside {
                continue;
            }
            let w = linalg::add_vec(&self.m.matvec(&z), &self.q);
            let signs_ok = (0..n).all(|i| match assignment[i] {
                0 => w[i] >= -tol,
                2 => w[i] <= tol,
                _ => w[i].abs() <= 1e-8 * (1.0 + norm2(&self.q)),
            });
            if signs_ok {
                out.push(z);
            }
        }
        dedup_points(&mut out);
        Ok(out)
    }

    /// KKT reduction of a polyhedron subproblem to an LCP in the multipliers:
    /// M′ = A M⁻¹ Aᵀ, q′ = b + A M⁻¹ q, and z = −M⁻¹(q + Aᵀμ).
    pub fn polyhedron_to_lcp(&self) -> Result<PolyhedronLcp, AviError> {
        let (a, b) = match &self.set {
            SetDescriptor::Polyhedron { a, b } => (a, b),
            _ => return Err(AviError::Invalid("KKT reduction needs a polyhedron set".into())),
        };
        let m_inv = self.m.inverse().map_err(|_| AviError::SingularMatrix)?;
        let a_minv = a.matmul(&m_inv);
        let m_prime = a_minv.matmul(&a.transpose());
        let q_prime = linalg::add_vec(b, &a_minv.matvec(&self.q));
        Ok(PolyhedronLcp {
            m_prime,
            q_prime,
            m_inv,
            a: a.clone(),
            q: self.q.clone(),
        })
    }

    /// All polyhedron subproblem solutions by active-set enumeration of the
    /// KKT system, used when the reduction to an LCP is unavailable.
    pub fn enumerate_polyhedron_solutions(&self) -> Result<Vec<Vec<f64>>, AviError> {
        let (a, b) = match &self.set {
            SetDescriptor::Polyhedron { a, b } => (a, b),
            _ => return Err(AviError::Invalid("enumeration needs a polyhedron set".into())),
        };
        let n = self.dim();
        let m = a.rows();
        if m > MAX_ENUMERATION_DIM {
            return Err(AviError::TooLarge { n: m, cap: MAX_ENUMERATION_DIM });
        }
        let tol = 1e-9 * (1.0 + b.iter().fold(0.0_f64, |s, v| s.max(v.abs())) + norm2(&self.q));
        let mut out = Vec::new();
        for mask in 0u32..(1 << m) {
            let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            let k = active.len();
            let mut kkt = Mat::zeros(n + k, n + k);
            for i in 0..n {
                for j in 0..n {
                    kkt[(i, j)] = self.m[(i, j)];
                }
            }
            for (t, &row) in active.iter().enumerate() {
                for j in 0..n {
                    kkt[(j, n + t)] = a[(row, j)];
                    kkt[(n + t, j)] = a[(row, j)];
                }
            }
            let mut rhs: Vec<f64> = self.q.iter().map(|v| -v).collect();
            rhs.extend(active.iter().map(|&row| b[row]));
            let sol = match linalg::solve_linear(&kkt, &rhs) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let z = &sol[..n];
            let mu = &sol[n..];
            if mu.iter().any(|&v| v < -tol) {
                continue;
            }
            let feasible = (0..m).all(|i| linalg::dot(a.row(i), z) <= b[i] + tol);
            if feasible {
                out.push(z.to_vec());
            }
        }
        dedup_points(&mut out);
        Ok(out)
    }
}

/// Closure data for recovering z from the multiplier LCP.
#[derive(Debug, Clone)]
pub struct PolyhedronLcp {
    pub m_prime: Mat,
    pub q_prime: Vec<f64>,
    m_inv: Mat,
    a: Mat,
    q: Vec<f64>,
}

impl PolyhedronLcp {
    pub fn recover(&self, mu: &[f64]) -> Vec<f64> {
        let shifted = linalg::add_vec(&self.q, &self.a.transpose().matvec(mu));
        self.m_inv.matvec(&shifted).iter().map(|v| -v).collect()
    }
}

/// Lemke complementary pivoting for 0 ≤ z ⊥ Mz + q ≥ 0 with the all-ones
/// covering vector and a lexicographic ratio test for degeneracy.
pub fn lemke(m: &Mat, q: &[f64], max_pivots: usize) -> Result<LcpResult, AviError> {
    let n = q.len();
    if !m.is_square() || m.rows() != n {
        return Err(AviError::Invalid("LCP needs square M matching q".into()));
    }
    if max_pivots == 0 {
        return Err(AviError::Invalid("max_pivots must be at least 1".into()));
    }
    if q.iter().all(|&v| v >= 0.0) {
        return Ok(LcpResult { status: LcpStatus::Solved, z: Some(vec![0.0; n]), pivots: 0 });
    }

    // Tableau for I·w − M·z − 1·aux = q.
    // Columns: w (0..n), z (n..2n), aux (2n), rhs (2n+1).
    let aux = 2 * n;
    let rhs = 2 * n + 1;
    let mut t = vec![vec![0.0_f64; 2 * n + 2]; n];
    for i in 0..n {
        t[i][i] = 1.0;
        for j in 0..n {
            t[i][n + j] = -m[(i, j)];
        }
        t[i][aux] = -1.0;
        t[i][rhs] = q[i];
    }
    let mut basis: Vec<usize> = (0..n).collect();

    // Lexicographic comparison of rows (rhs, w-columns)/pivot for the ratio
    // test; cross-multiplied to avoid division noise.
    let lex_less = |t: &Vec<Vec<f64>>, i: usize, r: usize, col: usize| -> bool {
        let ai = t[i][col];
        let ar = t[r][col];
        for c in std::iter::once(rhs).chain(0..n) {
            let lhs = t[i][c] * ar;
            let rh = t[r][c] * ai;
            if lhs < rh {
                return true;
            }
            if lhs > rh {
                return false;
            }
        }
        false
    };

    // Initial pivot: aux enters at the most negative rhs row (lexicographic
    // ties since the aux column is uniformly -1).
    let mut r = 0;
    for i in 1..n {
        let (qi, qr) = (t[i][rhs], t[r][rhs]);
        if qi < qr {
            r = i;
        } else if qi == qr {
            for c in 0..n {
                if t[i][c] != t[r][c] {
                    if t[i][c] < t[r][c] {
                        r = i;
                    }
                    break;
                }
            }
        }
    }
    let mut pivots = 0usize;
    let pivot = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, row: usize, col: usize| {
        let p = t[row][col];
        for v in t[row].iter_mut() {
            *v /= p;
        }
        for i in 0..n {
            if i == row {
                continue;
            }
            let factor = t[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..2 * n + 2 {
                t[i][j] -= factor * t[row][j];
            }
            t[i][col] = 0.0;
        }
        basis[row] = col;
    };

    let leaving = basis[r];
    pivot(&mut t, &mut basis, r, aux);
    pivots += 1;
    let mut entering = if leaving < n { n + leaving } else { leaving - n };

    loop {
        if pivots >= max_pivots {
            return Ok(LcpResult { status: LcpStatus::CycleGuardTripped, z: None, pivots });
        }
        let col_scale = (0..n).fold(0.0_f64, |s, i| s.max(t[i][entering].abs())).max(1.0);
        let eligible: Vec<usize> =
            (0..n).filter(|&i| t[i][entering] > 1e-12 * col_scale).collect();
        if eligible.is_empty() {
            return Ok(LcpResult { status: LcpStatus::RayTermination, z: None, pivots });
        }
        let mut r = eligible[0];
        for &i in &eligible[1..] {
            if lex_less(&t, i, r, entering) {
                r = i;
            }
        }
        let leaving = basis[r];
        pivot(&mut t, &mut basis, r, entering);
        pivots += 1;
        if leaving == aux {
            let mut z = vec![0.0; n];
            for (row, &var) in basis.iter().enumerate() {
                if (n..2 * n).contains(&var) {
                    z[var - n] = t[row][rhs];
                }
            }
            return Ok(LcpResult { status: LcpStatus::Solved, z: Some(z), pivots });
        }
        entering = if leaving < n { n + leaving } else { leaving - n };
    }
}

/// Brute-force LCP oracle: for every index set α solve M_αα z_α = −q_α,
/// zero elsewhere, and keep sign-feasible candidates. Singular blocks are
/// skipped and recorded.
pub fn lcp_enumerate(m: &Mat, q: &[f64]) -> Result<LcpEnumeration, AviError> {
    let n = q.len();
    if !m.is_square() || m.rows() != n {
        return Err(AviError::Invalid("LCP needs square M matching q".into()));
    }
    if n > MAX_ENUMERATION_DIM {
        return Err(AviError::TooLarge { n, cap: MAX_ENUMERATION_DIM });
    }
    let tol = 1e-10;
    let mut solutions = Vec::new();
    let mut skipped = Vec::new();
    for mask in 0u32..(1 << n) {
        let alpha: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let mut z = vec![0.0; n];
        if !alpha.is_empty() {
            let block = m.submatrix(&alpha, &alpha);
            let rhs: Vec<f64> = alpha.iter().map(|&i| -q[i]).collect();
            match linalg::solve_linear(&block, &rhs) {
                Ok(za) => {
                    for (k, &i) in alpha.iter().enumerate() {
                        z[i] = za[k];
                    }
                }
                Err(_) => {
                    skipped.push(mask);
                    continue;
                }
            }
        }
        if alpha.iter().any(|&i| z[i] < -tol) {
            continue;
        }
        let w = linalg::add_vec(&m.matvec(&z), q);
        let ok = (0..n).all(|i| alpha.contains(&i) || w[i] >= -tol);
        if ok {
            solutions.push(z);
        }
    }
    dedup_points(&mut solutions);
    Ok(LcpEnumeration { solutions, skipped_singular: skipped })
}

fn dedup_points(points: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points.drain(..) {
        let scale = 1.0 + norm2(&p);
        if !out.iter().any(|o| linalg::dist2(o, &p) <= 1e-9 * scale) {
            out.push(p);
        }
    }
    *points = out;
}

/// Strong-regularity modulus of the linearized inclusion at a solution.
///
/// Zero map: ‖M⁻¹‖. Polyhedral sets: complementarity pairs at the solution
/// are classified as strongly active, strongly inactive, or degenerate
/// (both sides below `degeneracy_tol`); every assignment of the degenerate
/// pairs yields a piece of the localized inverse whose reduced linear map
/// must be invertible, and the modulus is the largest piece-inverse
/// spectral norm. Certification is up to piece enumeration at the solution;
/// full coherent-orientation theory is out of scope.
pub fn strong_regularity_modulus(
    avi: &Avi,
    xstar: &[f64],
    opts: &ModulusOptions,
) -> Result<f64, AviError> {
    let n = avi.dim();
    if xstar.len() != n {
        return Err(AviError::Invalid("xstar length mismatch".into()));
    }
    let scale = 1.0 + norm2(&avi.q);
    let residual = avi.residual(xstar)?;
    if residual > opts.residual_tol * scale {
        return Err(AviError::NotSolution { residual });
    }
    let w = linalg::add_vec(&avi.m.matvec(xstar), &avi.q);
    match &avi.set {
        SetDescriptor::ZeroMap => {
            let inv = avi.m.inverse().map_err(|_| AviError::SingularMatrix)?;
            Ok(inv.spectral_norm())
        }
        SetDescriptor::Orthant(_) => {
            let tol = opts.degeneracy_tol;
            let mut basic = Vec::new();
            let mut degenerate = Vec::new();
            for i in 0..n {
                let zi = xstar[i];
                if zi > tol && w[i].abs() <= tol {
                    basic.push(i);
                } else if zi.abs() <= tol && w[i].abs() <= tol {
                    degenerate.push(i);
                } else if zi.abs() <= tol && w[i] > tol {
                    // strongly inactive: stays at the bound on every piece
                } else {
                    return Err(AviError::NotSolution { residual });
                }
            }
            max_piece_norm(&avi.m, &basic, &degenerate)
        }
        SetDescriptor::Box { lower, upper } => {
            let tol = opts.degeneracy_tol;
            let mut free = Vec::new();
            let mut degenerate = Vec::new();
            for i in 0..n {
                let at_lower = (xstar[i] - lower[i]).abs() <= tol;
                let at_upper = (upper[i] - xstar[i]).abs() <= tol;
                if !at_lower && !at_upper {
                    free.push(i);
                } else if w[i].abs() <= tol {
                    degenerate.push(i);
                }
                // bound active with |w| > tol: strongly pinned
            }
            max_piece_norm(&avi.m, &free, &degenerate)
        }
        SetDescriptor::Polyhedron { a, b } => {
            let tol = opts.degeneracy_tol;
            let slack: Vec<f64> = (0..a.rows())
                .map(|i| b[i] - linalg::dot(a.row(i), xstar))
                .collect();
            let active: Vec<usize> =
                (0..a.rows()).filter(|&i| slack[i].abs() <= tol * scale).collect();
            let mut mu = vec![0.0; a.rows()];
            if !active.is_empty() {
                let a_act = a.submatrix(&active, &(0..n).collect::<Vec<_>>());
                let gram = a_act.matmul(&a_act.transpose());
                let rhs = a_act.matvec(&w.iter().map(|v| -v).collect::<Vec<_>>());
                let mu_act = linalg::solve_linear(&gram, &rhs)
                    .map_err(|_| AviError::MultiplierUndetermined)?;
                // consistency: M x* + q + Aᵀ μ = 0
                let mut kkt_res = w.clone();
                for (k, &row) in active.iter().enumerate() {
                    for j in 0..n {
                        kkt_res[j] += a[(row, j)] * mu_act[k];
                    }
                }
                if norm2(&kkt_res) > 1e-7 * scale {
                    return Err(AviError::NotSolution { residual: norm2(&kkt_res) });
                }
                if mu_act.iter().any(|&v| v < -tol * scale) {
                    return Err(AviError::NotSolution { residual });
                }
                for (k, &row) in active.iter().enumerate() {
                    mu[row] = mu_act[k];
                }
            }
            let strong: Vec<usize> =
                active.iter().copied().filter(|&i| mu[i] > tol).collect();
            let degenerate: Vec<usize> =
                active.iter().copied().filter(|&i| mu[i] <= tol).collect();
            let mut best = 0.0_f64;
            for mask in 0u32..(1 << degenerate.len()) {
                let mut rows = strong.clone();
                for (bit, &i) in degenerate.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        rows.push(i);
                    }
                }
                rows.sort_unstable();
                let k = rows.len();
                let mut kkt = Mat::zeros(n + k, n + k);
                for i in 0..n {
                    for j in 0..n {
                        kkt[(i, j)] = avi.m[(i, j)];
                    }
                }
                for (t, &row) in rows.iter().enumerate() {
                    for j in 0..n {
                        kkt[(j, n + t)] = a[(row, j)];
                        kkt[(n + t, j)] = a[(row, j)];
                    }
                }
                let lu = LuFactors::factor(&kkt).map_err(|_| AviError::PieceSingular {
                    piece: format!("active rows {rows:?}"),
                })?;
                // z-block of the KKT inverse: columns from unit y loads
                let mut s = Mat::zeros(n, n);
                let mut e = vec![0.0; n + k];
                for col in 0..n {
                    e[col] = 1.0;
                    let sol = lu.solve(&e);
                    for i in 0..n {
                        s[(i, col)] = sol[i];
                    }
                    e[col] = 0.0;
                }
                best = best.max(s.spectral_norm());
            }
            Ok(best)
        }
    }
}

/// Max over piece assignments of ‖(M_ββ)⁻¹‖ where β ranges over the basic
/// set plus each subset of the degenerate set. An empty β contributes 0
/// (the piece map is identically zero).
fn max_piece_norm(m: &Mat, basic: &[usize], degenerate: &[usize]) -> Result<f64, AviError> {
    let mut best = 0.0_f64;
    for mask in 0u32..(1 << degenerate.len()) {
        let mut beta = basic.to_vec();
        for (bit, &i) in degenerate.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                beta.push(i);
            }
        }
        beta.sort_unstable();
        if beta.is_empty() {
            continue;
        }
        let block = m.submatrix(&beta, &beta);
        let inv = block.inverse().map_err(|_| AviError::PieceSingular {
            piece: format!("basic set {beta:?}"),
        })?;
        best = best.max(inv.spectral_norm());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{PolySystem, PolyTerm};
    use crate::problem::ProblemBuilder;

    fn sqrt_problem(set: SetDescriptor) -> ProblemInstance {
        let poly = PolySystem::new(
            1,
            vec![vec![
                PolyTerm { coeff: 1.0, exponents: vec![2] },
                PolyTerm { coeff: -1.0, exponents: vec![0] },
            ]],
        );
        ProblemBuilder::from_poly(poly, set).solution(vec![1.0]).kappa(10.0).build().unwrap()
    }

    #[test]
    fn linearize_quadratic() {
        let p = sqrt_problem(SetDescriptor::Orthant(1));
        let avi = Avi::linearize(&p, &[1.5]);
        assert_eq!(avi.m()[(0, 0)], 3.0);
        assert_eq!(avi.q()[0], -3.25);
    }

    #[test]
    fn linearize_affine_is_constant() {
        let affine = PolySystem::new(
            2,
            vec![
                vec![
                    PolyTerm { coeff: 2.0, exponents: vec![1, 0] },
                    PolyTerm { coeff: 1.0, exponents: vec![0, 1] },
                    PolyTerm { coeff: -5.0, exponents: vec![0, 0] },
                ],
                vec![
                    PolyTerm { coeff: 1.0, exponents: vec![1, 0] },
                    PolyTerm { coeff: 2.0, exponents: vec![0, 1] },
                    PolyTerm { coeff: -6.0, exponents: vec![0, 0] },
                ],
            ],
        );
        let p = ProblemBuilder::from_poly(affine, SetDescriptor::Orthant(2)).build().unwrap();
        let a1 = Avi::linearize(&p, &[0.0, 0.0]);
        let a2 = Avi::linearize(&p, &[3.0, -2.0]);
        assert!((a1.q()[0] - a2.q()[0]).abs() < 1e-12);
        assert!((a1.q()[1] - a2.q()[1]).abs() < 1e-12);
        assert_eq!(a1.q(), &[-5.0, -6.0]);
    }

    #[test]
    fn linearize_fixed_point_at_solution() {
        let p = sqrt_problem(SetDescriptor::ZeroMap);
        let avi = Avi::linearize(&p, &[1.0]);
        assert_eq!(avi.m()[(0, 0)], 2.0);
        assert_eq!(avi.q()[0], -2.0);
        let sol = avi.solve(&[1.0], None).unwrap();
        assert!((sol.z[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lemke_scalar() {
        let r = lemke(&Mat::from_rows(&[&[1.0]]), &[-2.0], 100).unwrap();
        assert_eq!(r.status, LcpStatus::Solved);
        assert!((r.z.unwrap()[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lemke_trivial_when_q_nonnegative() {
        let r = lemke(&Mat::from_rows(&[&[-5.0, 3.0], &[2.0, 1.0]]), &[0.5, 2.0], 100).unwrap();
        assert_eq!(r.status, LcpStatus::Solved);
        assert_eq!(r.pivots, 0);
        assert_eq!(r.z.unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn lemke_two_by_two() {
        let m = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = lemke(&m, &[-5.0, -6.0], 100).unwrap();
        let z = r.z.unwrap();
        assert!((z[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((z[1] - 7.0 / 3.0).abs() < 1e-12);
        // complementarity invariants from the original data
        let w = linalg::add_vec(&m.matvec(&z), &[-5.0, -6.0]);
        assert!(w.iter().all(|&v| v >= -1e-10));
        assert!(linalg::dot(&z, &w).abs() <= 1e-8 * (1.0 + norm2(&[-5.0, -6.0])));
    }

    #[test]
    fn enumerate_scalar_cases() {
        let e = lcp_enumerate(&Mat::from_rows(&[&[1.0]]), &[-2.0]).unwrap();
        assert_eq!(e.solutions, vec![vec![2.0]]);

        let e = lcp_enumerate(&Mat::from_rows(&[&[-1.0]]), &[1.0]).unwrap();
        assert_eq!(e.solutions.len(), 2);
        assert!(e.solutions.contains(&vec![0.0]));
        assert!(e.solutions.iter().any(|z| (z[0] - 1.0).abs() < 1e-12));
    }

    #[test]
    fn enumerate_p_matrix_unique() {
        let m = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = lcp_enumerate(&m, &[-5.0, -6.0]).unwrap();
        assert_eq!(e.solutions.len(), 1);
        assert!((e.solutions[0][0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((e.solutions[0][1] - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_orthant_scalar() {
        let avi = Avi::new(Mat::from_rows(&[&[3.0]]), vec![-3.25], SetDescriptor::Orthant(1))
            .unwrap();
        let s = avi.solve(&[1.5], None).unwrap();
        assert!((s.z[0] - 3.25 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_prefers_hint_nearest() {
        let avi = Avi::new(Mat::from_rows(&[&[-1.0]]), vec![1.0], SetDescriptor::Orthant(1))
            .unwrap();
        let s = avi.solve(&[0.9], None).unwrap();
        assert!((s.z[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.candidates, 2);
        let s = avi.solve(&[0.1], None).unwrap();
        assert_eq!(s.z[0], 0.0);
    }

    #[test]
    fn solve_localization() {
        let avi = Avi::new(Mat::from_rows(&[&[-1.0]]), vec![1.0], SetDescriptor::Orthant(1))
            .unwrap();
        let s = avi.solve(&[0.0], Some((&[1.0], 0.25))).unwrap();
        assert!((s.z[0] - 1.0).abs() < 1e-12);
        assert!(matches!(
            avi.solve(&[0.0], Some((&[5.0], 0.5))),
            Err(AviError::NoLocalizedSolution)
        ));
    }

    #[test]
    fn box_face_cases() {
        let mk = |q: f64| {
            Avi::new(
                Mat::from_rows(&[&[1.0]]),
                vec![q],
                SetDescriptor::Box { lower: vec![0.0], upper: vec![2.0] },
            )
            .unwrap()
        };
        assert_eq!(mk(-3.0).enumerate_box_solutions().unwrap(), vec![vec![2.0]]);
        assert_eq!(mk(-1.0).enumerate_box_solutions().unwrap(), vec![vec![1.0]]);
        assert_eq!(mk(1.0).enumerate_box_solutions().unwrap(), vec![vec![0.0]]);
    }

    #[test]
    fn polyhedron_reduction() {
        // C = {x <= 1}, M = [1], q = [-2]: mu = 1, z = 1
        let avi = Avi::new(
            Mat::from_rows(&[&[1.0]]),
            vec![-2.0],
            SetDescriptor::Polyhedron { a: Mat::from_rows(&[&[1.0]]), b: vec![1.0] },
        )
        .unwrap();
        let red = avi.polyhedron_to_lcp().unwrap();
        assert!((red.m_prime[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((red.q_prime[0] + 1.0).abs() < 1e-14);
        let lcp = lemke(&red.m_prime, &red.q_prime, 100).unwrap();
        let mu = lcp.z.unwrap();
        assert!((mu[0] - 1.0).abs() < 1e-12);
        let z = red.recover(&mu);
        assert!((z[0] - 1.0).abs() < 1e-12);
        assert!(avi.residual(&z).unwrap() <= 1e-8);

        // inactive constraint: unconstrained root inside
        let avi2 = Avi::new(
            Mat::from_rows(&[&[1.0]]),
            vec![-0.5],
            SetDescriptor::Polyhedron { a: Mat::from_rows(&[&[1.0]]), b: vec![1.0] },
        )
        .unwrap();
        let s = avi2.solve(&[0.0], None).unwrap();
        assert!((s.z[0] - 0.5).abs() < 1e-12);

        // huge bound never binds
        let avi3 = Avi::new(
            Mat::from_rows(&[&[2.0]]),
            vec![-3.0],
            SetDescriptor::Polyhedron { a: Mat::from_rows(&[&[1.0]]), b: vec![1e9] },
        )
        .unwrap();
        let s = avi3.solve(&[0.0], None).unwrap();
        assert!((s.z[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn modulus_zero_map() {
        let avi =
            Avi::new(Mat::from_rows(&[&[2.0]]), vec![-2.0], SetDescriptor::ZeroMap).unwrap();
        let lambda = strong_regularity_modulus(&avi, &[1.0], &ModulusOptions::default()).unwrap();
        assert!((lambda - 0.5).abs() < 1e-12);
    }

    #[test]
    fn modulus_matches_inverse_min_singular_value() {
        let c = 0.28_f64.cos();
        let s = 0.28_f64.sin();
        let rot = Mat::from_rows(&[&[c, -s], &[s, c]]);
        let m = rot.matmul(&Mat::diag(&[0.5, 4.0])).matmul(&rot.transpose());
        let q = vec![-1.0, 2.0];
        let z = linalg::solve_linear(&m, &[1.0, -2.0]).unwrap();
        let avi = Avi::new(m.clone(), q, SetDescriptor::ZeroMap).unwrap();
        let lambda = strong_regularity_modulus(&avi, &z, &ModulusOptions::default()).unwrap();
        assert!((lambda - 1.0 / m.min_singular_value()).abs() < 1e-10);
    }

    #[test]
    fn modulus_orthant_strict_complementarity() {
        let avi = Avi::new(
            Mat::diag(&[2.0, 3.0]),
            vec![-2.0, 1.0],
            SetDescriptor::Orthant(2),
        )
        .unwrap();
        let lambda =
            strong_regularity_modulus(&avi, &[1.0, 0.0], &ModulusOptions::default()).unwrap();
        assert!((lambda - 0.5).abs() < 1e-12);
    }

    #[test]
    fn modulus_orthant_degenerate() {
        let avi =
            Avi::new(Mat::from_rows(&[&[1.0]]), vec![0.0], SetDescriptor::Orthant(1)).unwrap();
        let lambda = strong_regularity_modulus(&avi, &[0.0], &ModulusOptions::default()).unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modulus_rejects_non_solution() {
        let avi =
            Avi::new(Mat::from_rows(&[&[2.0]]), vec![-2.0], SetDescriptor::ZeroMap).unwrap();
        assert!(matches!(
            strong_regularity_modulus(&avi, &[0.2], &ModulusOptions::default()),
            Err(AviError::NotSolution { .. })
        ));
    }

    #[test]
    fn zero_map_singular_matrix_errors() {
        let avi =
            Avi::new(Mat::from_rows(&[&[0.0]]), vec![-1.0], SetDescriptor::ZeroMap).unwrap();
        assert!(matches!(avi.solve(&[0.0], None), Err(AviError::SingularMatrix)));
    }
}
