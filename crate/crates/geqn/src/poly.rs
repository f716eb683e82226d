//! Exact multivariate polynomial systems: evaluation, exact derivatives of
//! every order, and norms of the resulting symmetric multilinear maps.
//!
//! Problem files carry polynomials so that Jacobians, Hessians, and the
//! higher derivative tensors entering the analytic-growth constant are exact
//! rather than finite-differenced.

use std::collections::BTreeMap;

use crate::linalg::Mat;

/// One monomial `coefficient * x_0^{e_0} ... x_{n-1}^{e_{n-1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

/// A polynomial map ℝⁿ → ℝⁿ, one term list per output component.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    n: usize,
    components: Vec<Vec<PolyTerm>>,
}

/// Order-m derivative of a polynomial system at a point, stored densely:
/// `entry[i][j_1, …, j_m] = ∂^m f_i / ∂x_{j_1} … ∂x_{j_m}`.
#[derive(Debug, Clone)]
pub struct DerivTensor {
    n: usize,
    order: usize,
    /// Per component, n^order entries in row-major multi-index order.
    entries: Vec<Vec<f64>>,
}

impl PolySystem {
    pub fn new(n: usize, components: Vec<Vec<PolyTerm>>) -> Self {
        assert_eq!(components.len(), n, "one term list per component");
        for terms in &components {
            for t in terms {
                assert_eq!(t.exponents.len(), n, "exponent vector length must equal n");
            }
        }
        PolySystem { n, components }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Vec<PolyTerm>] {
        &self.components
    }

    pub fn total_degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .map(|t| t.exponents.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.components
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| {
                        t.coeff
                            * t.exponents
                                .iter()
                                .zip(x)
                                .map(|(&e, &xi)| xi.powi(e as i32))
                                .product::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> Mat {
        assert_eq!(x.len(), self.n);
        let mut jac = Mat::zeros(self.n, self.n);
        for (i, terms) in self.components.iter().enumerate() {
            for t in terms {
                for j in 0..self.n {
                    let e = t.exponents[j];
                    if e == 0 {
                        continue;
                    }
                    let mut v = t.coeff * e as f64;
                    for (k, (&ek, &xk)) in t.exponents.iter().zip(x).enumerate() {
                        let power = if k == j { ek - 1 } else { ek };
                        v *= xk.powi(power as i32);
                    }
                    jac[(i, j)] += v;
                }
            }
        }
        jac
    }

    /// Exact order-m derivative tensor at a point.
    pub fn derivative_tensor(&self, x: &[f64], order: usize) -> DerivTensor {
        assert_eq!(x.len(), self.n);
        assert!(order >= 1);
        let size = self.n.pow(order as u32);
        let mut entries = vec![vec![0.0; size]; self.n];
        let mut index = vec![0usize; order];
        for flat in 0..size {
            let mut rem = flat;
            for slot in (0..order).rev() {
                index[slot] = rem % self.n;
                rem /= self.n;
            }
            let mut counts = vec![0u32; self.n];
            for &j in &index {
                counts[j] += 1;
            }
            for (i, terms) in self.components.iter().enumerate() {
                let mut total = 0.0;
                'terms: for t in terms {
                    let mut v = t.coeff;
                    for j in 0..self.n {
                        let e = t.exponents[j];
                        let c = counts[j];
                        if c > e {
                            continue 'terms;
                        }
                        // falling factorial e * (e-1) * ... * (e-c+1)
                        for step in 0..c {
                            v *= (e - step) as f64;
                        }
                        v *= x[j].powi((e - c) as i32);
                    }
                    total += v;
                }
                entries[i][flat] = total;
            }
        }
        DerivTensor { n: self.n, order, entries }
    }

    /// Hessian matrices of each component at a point.
    pub fn hessians(&self, x: &[f64]) -> Vec<Mat> {
        let tensor = self.derivative_tensor(x, 2);
        (0..self.n)
            .map(|i| {
                let mut h = Mat::zeros(self.n, self.n);
                for j in 0..self.n {
                    for k in 0..self.n {
                        h[(j, k)] = tensor.entries[i][j * self.n + k];
                    }
                }
                h
            })
            .collect()
    }

    /// The polynomial x ↦ p(x + shift), expanded exactly.
    pub fn translate(&self, shift: &[f64]) -> PolySystem {
        assert_eq!(shift.len(), self.n);
        let components = self
            .components
            .iter()
            .map(|terms| {
                let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
                for t in terms {
                    let mut partial: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), t.coeff)];
                    for (j, &e) in t.exponents.iter().enumerate() {
                        let mut next = Vec::with_capacity(partial.len() * (e as usize + 1));
                        for (exps, coeff) in &partial {
                            // (x_j + s_j)^e = sum_a C(e,a) s_j^(e-a) x_j^a
                            let mut binom = 1.0;
                            for a in 0..=e {
                                let c = coeff * binom * shift[j].powi((e - a) as i32);
                                let mut ex = exps.clone();
                                ex.push(a);
                                next.push((ex, c));
                                binom *= (e - a) as f64 / (a + 1) as f64;
                            }
                        }
                        partial = next;
                    }
                    for (exps, coeff) in partial {
                        *acc.entry(exps).or_insert(0.0) += coeff;
                    }
                }
                acc.into_iter()
                    .filter(|(_, c)| *c != 0.0)
                    .map(|(exponents, coeff)| PolyTerm { coeff, exponents })
                    .collect()
            })
            .collect();
        PolySystem { n: self.n, components }
    }
}

impl DerivTensor {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Applies the tensor to m copies of a direction: w_i = T_i(v, …, v).
    pub fn apply_diagonal(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let size = self.n.pow(self.order as u32);
        let mut out = vec![0.0; self.n];
        for flat in 0..size {
            let mut weight = 1.0;
            let mut rem = flat;
            for _ in 0..self.order {
                weight *= v[rem % self.n];
                rem /= self.n;
            }
            if weight == 0.0 {
                continue;
            }
            for i in 0..self.n {
                out[i] += self.entries[i][flat] * weight;
            }
        }
        out
    }

    /// Gradient of v ↦ T(v, …, v): m · T(v, …, v, ·) as an n×n-free matrix
    /// applied per component; returns the Jacobian of `apply_diagonal`.
    fn diagonal_jacobian(&self, v: &[f64]) -> Mat {
        let size = self.n.pow(self.order as u32);
        let mut jac = Mat::zeros(self.n, self.n);
        let mut index = vec![0usize; self.order];
        for flat in 0..size {
            let mut rem = flat;
            for slot in (0..self.order).rev() {
                index[slot] = rem % self.n;
                rem /= self.n;
            }
            for slot in 0..self.order {
                let j = index[slot];
                let mut weight = 1.0;
                for (other, &idx) in index.iter().enumerate() {
                    if other != slot {
                        weight *= v[idx];
                    }
                }
                if weight == 0.0 {
                    continue;
                }
                for i in 0..self.n {
                    jac[(i, j)] += self.entries[i][flat] * weight;
                }
            }
        }
        jac
    }

    /// Norm of the symmetric multilinear map: sup over unit v of ‖T(v,…,v)‖₂.
    ///
    /// Order 1 reduces to the spectral norm. Higher orders use a direction
    /// grid followed by projected gradient ascent; dense grids and a 1e-12
    /// step tolerance for n ≤ 3, sparser seeding and 1e-8 beyond.
    pub fn norm(&self) -> f64 {
        if self.order == 1 {
            let mut m = Mat::zeros(self.n, self.n);
            for i in 0..self.n {
                for j in 0..self.n {
                    m[(i, j)] = self.entries[i][j];
                }
            }
            return m.spectral_norm();
        }
        if self.n == 1 {
            return self.entries[0][0].abs();
        }
        let (seeds, step_tol) = if self.n <= 3 {
            (direction_grid(self.n, 1024), 1e-12)
        } else {
            (direction_grid(self.n, 256), 1e-8)
        };
        let mut best = 0.0_f64;
        let mut best_v = vec![0.0; self.n];
        for v in seeds {
            let g = norm2_of(&self.apply_diagonal(&v));
            if g > best {
                best = g;
                best_v = v;
            }
        }
        // projected gradient ascent from the best seed
        let mut v = best_v;
        for _ in 0..500 {
            let w = self.apply_diagonal(&v);
            let gw = norm2_of(&w);
            if gw == 0.0 {
                break;
            }
            let jac = self.diagonal_jacobian(&v);
            // gradient of ||T(v..v)||^2 is 2 Jᵀ w
            let mut grad = vec![0.0; self.n];
            for j in 0..self.n {
                for i in 0..self.n {
                    grad[j] += jac[(i, j)] * w[i];
                }
            }
            let vg: f64 = v.iter().zip(&grad).map(|(a, b)| a * b).sum();
            let tangent: Vec<f64> = grad.iter().zip(&v).map(|(g, vi)| g - vg * vi).collect();
            let tnorm = norm2_of(&tangent);
            if tnorm <= step_tol * (1.0 + gw) {
                break;
            }
            let mut eta = 0.5 / (1.0 + tnorm);
            let mut advanced = false;
            for _ in 0..40 {
                let cand: Vec<f64> =
                    v.iter().zip(&tangent).map(|(vi, ti)| vi + eta * ti).collect();
                let cn = norm2_of(&cand);
                let cand: Vec<f64> = cand.iter().map(|c| c / cn).collect();
                if norm2_of(&self.apply_diagonal(&cand)) > gw {
                    let moved = v
                        .iter()
                        .zip(&cand)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    v = cand;
                    advanced = true;
                    if moved <= step_tol {
                        advanced = false;
                    }
                    break;
                }
                eta *= 0.5;
            }
            if !advanced {
                break;
            }
        }
        best.max(norm2_of(&self.apply_diagonal(&v)))
    }
}

/// Norm of the second-derivative map given its component Hessians:
/// sup over unit v of ‖(vᵀ H_i v)_i‖₂.
pub fn bilinear_norm(hessians: &[Mat]) -> f64 {
    let n = hessians.len();
    assert!(hessians.iter().all(|h| h.rows() == n && h.cols() == n));
    let entries = hessians
        .iter()
        .map(|h| {
            let mut flat = Vec::with_capacity(n * n);
            for j in 0..n {
                for k in 0..n {
                    flat.push(h[(j, k)]);
                }
            }
            flat
        })
        .collect();
    DerivTensor { n, order: 2, entries }.norm()
}

fn norm2_of(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Deterministic unit directions: axes plus a low-discrepancy sweep.
fn direction_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(count + 2 * n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        dirs.push(e.clone());
        e[j] = -1.0;
        dirs.push(e);
    }
    if n == 2 {
        for i in 0..count {
            let theta = std::f64::consts::PI * i as f64 / count as f64;
            dirs.push(vec![theta.cos(), theta.sin()]);
        }
    } else {
        // rough deterministic sphere cover via a Weyl sequence
        let mut state = 0.5_f64;
        for _ in 0..count {
            let mut v = Vec::with_capacity(n);
            let mut norm = 0.0;
            for _ in 0..n {
                state = (state + 0.7548776662466927) % 1.0;
                let c = 2.0 * state - 1.0;
                v.push(c);
                norm += c * c;
            }
            let norm = norm.sqrt();
            if norm > 1e-9 {
                dirs.push(v.into_iter().map(|c| c / norm).collect());
            }
        }
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_poly(terms: &[(f64, u32)]) -> PolySystem {
        PolySystem::new(
            1,
            vec![terms
                .iter()
                .map(|&(c, e)| PolyTerm { coeff: c, exponents: vec![e] })
                .collect()],
        )
    }

    #[test]
    fn eval_and_jacobian() {
        // f(x) = x^2 - 1
        let p = scalar_poly(&[(1.0, 2), (-1.0, 0)]);
        assert_eq!(p.eval(&[1.5]), vec![1.25]);
        assert_eq!(p.jacobian(&[1.5])[(0, 0)], 3.0);
    }

    #[test]
    fn two_dim_jacobian() {
        // f = (x0^2 + x1, x0 x1)
        let p = PolySystem::new(
            2,
            vec![
                vec![
                    PolyTerm { coeff: 1.0, exponents: vec![2, 0] },
                    PolyTerm { coeff: 1.0, exponents: vec![0, 1] },
                ],
                vec![PolyTerm { coeff: 1.0, exponents: vec![1, 1] }],
            ],
        );
        let j = p.jacobian(&[2.0, 3.0]);
        assert_eq!(j[(0, 0)], 4.0);
        assert_eq!(j[(0, 1)], 1.0);
        assert_eq!(j[(1, 0)], 3.0);
        assert_eq!(j[(1, 1)], 2.0);
    }

    #[test]
    fn derivative_tensors_of_cubic() {
        // f(x) = x^3: f''(1) = 6, f'''(1) = 6, f''''(1) = 0
        let p = scalar_poly(&[(1.0, 3)]);
        assert_eq!(p.derivative_tensor(&[1.0], 2).norm(), 6.0);
        assert_eq!(p.derivative_tensor(&[1.0], 3).norm(), 6.0);
        assert_eq!(p.derivative_tensor(&[1.0], 4).norm(), 0.0);
    }

    #[test]
    fn hessian_entries() {
        // f0 = x0^2 x1 → H0 = [[2 x1, 2 x0], [2 x0, 0]]
        let p = PolySystem::new(
            2,
            vec![
                vec![PolyTerm { coeff: 1.0, exponents: vec![2, 1] }],
                vec![PolyTerm { coeff: 1.0, exponents: vec![0, 1] }],
            ],
        );
        let h = p.hessians(&[3.0, 5.0]);
        assert_eq!(h[0][(0, 0)], 10.0);
        assert_eq!(h[0][(0, 1)], 6.0);
        assert_eq!(h[0][(1, 0)], 6.0);
        assert_eq!(h[0][(1, 1)], 0.0);
        assert_eq!(h[1].max_abs(), 0.0);
    }

    #[test]
    fn bilinear_norm_of_symmetric_pair() {
        // f = (x0^2 - x1^2, 2 x0 x1): Hessians are 2*[[1,0],[0,-1]] and
        // 2*[[0,1],[1,0]]; T(v,v) has norm 2 for every unit v.
        let p = PolySystem::new(
            2,
            vec![
                vec![
                    PolyTerm { coeff: 1.0, exponents: vec![2, 0] },
                    PolyTerm { coeff: -1.0, exponents: vec![0, 2] },
                ],
                vec![PolyTerm { coeff: 2.0, exponents: vec![1, 1] }],
            ],
        );
        let norm = p.derivative_tensor(&[0.3, -0.7], 2).norm();
        assert!((norm - 2.0).abs() < 1e-10, "norm = {norm}");
    }

    #[test]
    fn translate_recenters_polynomial() {
        // p(x) = x^2 - 1 shifted by +1: q(x) = p(x+1) = x^2 + 2x
        let p = scalar_poly(&[(1.0, 2), (-1.0, 0)]);
        let q = p.translate(&[1.0]);
        assert_eq!(q.eval(&[0.0]), vec![0.0]);
        assert_eq!(q.eval(&[0.5]), p.eval(&[1.5]));
        assert_eq!(q.jacobian(&[0.25])[(0, 0)], p.jacobian(&[1.25])[(0, 0)]);
    }

    #[test]
    fn total_degree() {
        let p = PolySystem::new(
            2,
            vec![
                vec![PolyTerm { coeff: 1.0, exponents: vec![2, 1] }],
                vec![PolyTerm { coeff: 1.0, exponents: vec![0, 1] }],
            ],
        );
        assert_eq!(p.total_degree(), 3);
    }
}
