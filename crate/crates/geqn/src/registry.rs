//! Built-in benchmark problems with their certified majorant pairings.
//!
//! Every polynomial entry also ships as a `.geqn` file under `problems/`;
//! the extremal witness has no polynomial form and lives only here.

use crate::linalg::Mat;
use crate::majorant::MajorantSpec;
use crate::poly::{PolySystem, PolyTerm};
use crate::problem::{ProblemBuilder, ProblemInstance, SetDescriptor};

/// A majorant attached to a problem together with a certified start point.
#[derive(Debug, Clone)]
pub struct SpecPairing {
    pub label: &'static str,
    pub spec: MajorantSpec,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub problem: ProblemInstance,
    pub pairings: Vec<SpecPairing>,
}

fn term(coeff: f64, exponents: &[u32]) -> PolyTerm {
    PolyTerm { coeff, exponents: exponents.to_vec() }
}

fn hoelder(lambda: f64, k: f64) -> MajorantSpec {
    MajorantSpec::hoelder(lambda, k, 1.0, f64::INFINITY).expect("valid constants")
}

fn sqrt_poly() -> PolySystem {
    PolySystem::new(1, vec![vec![term(1.0, &[2]), term(-1.0, &[0])]])
}

/// x² − 1 on the nonnegative orthant; solution 1, λ = 1/(2x̄) = 0.5, L = 2.
fn sqrt1() -> RegistryEntry {
    let problem = ProblemBuilder::from_poly(sqrt_poly(), SetDescriptor::Orthant(1))
        .solution(vec![1.0])
        .kappa(10.0)
        .build()
        .expect("registry problem");
    RegistryEntry {
        name: "sqrt1",
        problem,
        pairings: vec![SpecPairing {
            label: "hoelder-k1",
            spec: hoelder(0.5, 1.0),
            x0: vec![0.5],
        }],
    }
}

/// The same equation with F ≡ {0}; carries both the Lipschitz and the
/// analytic-growth pairings.
fn sqrt1_zeromap() -> RegistryEntry {
    let problem = ProblemBuilder::from_poly(sqrt_poly(), SetDescriptor::ZeroMap)
        .solution(vec![1.0])
        .kappa(10.0)
        .build()
        .expect("registry problem");
    RegistryEntry {
        name: "sqrt1-zeromap",
        problem,
        pairings: vec![
            SpecPairing { label: "hoelder-k1", spec: hoelder(0.5, 1.0), x0: vec![0.5] },
            SpecPairing {
                label: "smale-gamma05",
                spec: MajorantSpec::smale(0.5, 0.5).expect("valid constants"),
                x0: vec![0.75],
            },
        ],
    }
}

/// Affine complementarity problem with a positive definite matrix; Newton
/// finishes in one step from anywhere the subproblem is solvable.
fn affine_vi() -> RegistryEntry {
    let poly = PolySystem::new(
        2,
        vec![
            vec![term(2.0, &[1, 0]), term(1.0, &[0, 1]), term(-5.0, &[0, 0])],
            vec![term(1.0, &[1, 0]), term(2.0, &[0, 1]), term(-6.0, &[0, 0])],
        ],
    );
    let problem = ProblemBuilder::from_poly(poly, SetDescriptor::Orthant(2))
        .solution(vec![4.0 / 3.0, 7.0 / 3.0])
        .kappa(10.0)
        .build()
        .expect("registry problem");
    RegistryEntry {
        name: "affine-vi",
        problem,
        // the Jacobian is constant, so any positive K majorizes; lambda is
        // the true modulus 1/sigma_min(M) = 1
        pairings: vec![SpecPairing {
            label: "hoelder-k005",
            spec: hoelder(1.0, 0.05),
            x0: vec![3.0, 3.0],
        }],
    }
}

/// 2-D complementarity problem with strict complementarity at (1, 0):
/// f = (x₀² − 1, x₀ + x₁ + 1); basic block [2], so λ = 0.5, L = 2.
fn ncp2() -> RegistryEntry {
    let poly = PolySystem::new(
        2,
        vec![
            vec![term(1.0, &[2, 0]), term(-1.0, &[0, 0])],
            vec![term(1.0, &[1, 0]), term(1.0, &[0, 1]), term(1.0, &[0, 0])],
        ],
    );
    let problem = ProblemBuilder::from_poly(poly, SetDescriptor::Orthant(2))
        .solution(vec![1.0, 0.0])
        .kappa(10.0)
        .build()
        .expect("registry problem");
    RegistryEntry {
        name: "ncp2",
        problem,
        pairings: vec![SpecPairing {
            label: "hoelder-k1",
            spec: hoelder(0.5, 1.0),
            x0: vec![0.6, 0.3],
        }],
    }
}

/// Box-constrained problem whose solution sits on the upper face in the
/// first coordinate and in the interior in the second:
/// f = (x₀ + 0.5·x₁ − 4, x₁² − 1) on [0,2]².
fn box2() -> RegistryEntry {
    let poly = PolySystem::new(
        2,
        vec![
            vec![term(1.0, &[1, 0]), term(0.5, &[0, 1]), term(-4.0, &[0, 0])],
            vec![term(1.0, &[0, 2]), term(-1.0, &[0, 0])],
        ],
    );
    let problem = ProblemBuilder::from_poly(
        poly,
        SetDescriptor::Box { lower: vec![0.0, 0.0], upper: vec![2.0, 2.0] },
    )
    .solution(vec![2.0, 1.0])
    .kappa(10.0)
    .build()
    .expect("registry problem");
    RegistryEntry {
        name: "box2",
        problem,
        pairings: vec![SpecPairing {
            label: "hoelder-k1",
            spec: hoelder(0.5, 1.0),
            x0: vec![1.6, 0.7],
        }],
    }
}

/// Half-space constrained problem with a strongly active constraint:
/// f = (0.25·x₀² + x₀ − 2, x₁ − 1.5) over {x₀ + x₁ ≤ 1}; the solution has
/// x₀ = √22 − 4 with multiplier ≈ 1.19 > 0.
fn halfspace2() -> RegistryEntry {
    let x0_star = 22.0_f64.sqrt() - 4.0;
    let x1_star = 1.0 - x0_star;
    let poly = PolySystem::new(
        2,
        vec![
            vec![term(0.25, &[2, 0]), term(1.0, &[1, 0]), term(-2.0, &[0, 0])],
            vec![term(1.0, &[0, 1]), term(-1.5, &[0, 0])],
        ],
    );
    let problem = ProblemBuilder::from_poly(
        poly,
        SetDescriptor::Polyhedron { a: Mat::from_rows(&[&[1.0, 1.0]]), b: vec![1.0] },
    )
    .solution(vec![x0_star, x1_star])
    .kappa(10.0)
    .build()
    .expect("registry problem");
    // piece-inverse norm 4/sqrt(22); Jacobian Lipschitz constant 0.5
    let lambda = 4.0 / 22.0_f64.sqrt();
    RegistryEntry {
        name: "halfspace2",
        problem,
        pairings: vec![SpecPairing {
            label: "hoelder-fitted",
            spec: hoelder(lambda, 0.5 * lambda),
            x0: vec![x0_star + 0.3, x1_star + 0.2],
        }],
    }
}

/// Scanner negative control: x(x − 0.1)(x − 0.5) has extra roots 0.1 and
/// 0.5 near the declared solution 0. No certified pairing.
fn planted_cubic() -> RegistryEntry {
    let poly = PolySystem::new(
        1,
        vec![vec![term(1.0, &[3]), term(-0.6, &[2]), term(0.05, &[1])]],
    );
    let problem = ProblemBuilder::from_poly(poly, SetDescriptor::ZeroMap)
        .solution(vec![0.0])
        .kappa(10.0)
        .build()
        .expect("registry problem");
    RegistryEntry { name: "planted-cubic", problem, pairings: vec![] }
}

/// f(x) = x on the orthant with solution 0: both sides of the
/// complementarity pair vanish, exercising degenerate piece enumeration
/// (modulus 1).
fn degenerate_orthant() -> RegistryEntry {
    let poly = PolySystem::new(1, vec![vec![term(1.0, &[1])]]);
    let problem = ProblemBuilder::from_poly(poly, SetDescriptor::Orthant(1))
        .solution(vec![0.0])
        .kappa(10.0)
        .build()
        .expect("registry problem");
    RegistryEntry {
        name: "degenerate-orthant",
        problem,
        pairings: vec![SpecPairing {
            label: "hoelder-k01",
            spec: hoelder(1.0, 0.1),
            x0: vec![0.3],
        }],
    }
}

/// Tight scalar witness for the Lipschitz majorant with K = 1.
fn extremal_hoelder() -> RegistryEntry {
    let spec = MajorantSpec::hoelder(1.0, 1.0, 1.0, f64::INFINITY).expect("valid constants");
    let problem = ProblemInstance::extremal(&spec).expect("extremal witness");
    RegistryEntry {
        name: "extremal-hoelder",
        problem,
        pairings: vec![SpecPairing { label: "hoelder-k1", spec, x0: vec![0.5] }],
    }
}

/// All built-in problems in deterministic order.
pub fn registry() -> Vec<RegistryEntry> {
    vec![
        sqrt1(),
        sqrt1_zeromap(),
        affine_vi(),
        ncp2(),
        box2(),
        halfspace2(),
        planted_cubic(),
        degenerate_orthant(),
        extremal_hoelder(),
    ]
}

/// The documented incompatible pairing: K = 0.5 is too small to majorize
/// x² − 1 with λ = 0.5, so the derivative-variation check must fail.
pub fn incompatible_pairing() -> (ProblemInstance, MajorantSpec) {
    let problem = ProblemBuilder::from_poly(sqrt_poly(), SetDescriptor::ZeroMap)
        .solution(vec![1.0])
        .kappa(10.0)
        .build()
        .expect("registry problem");
    (problem, hoelder(0.5, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avi::{strong_regularity_modulus, Avi, ModulusOptions};

    #[test]
    fn registry_has_expected_shape() {
        let entries = registry();
        assert!(entries.len() >= 8);
        let names: Vec<_> = entries.iter().map(|e| e.name).collect();
        assert_eq!(names.len(), names.iter().collect::<std::collections::BTreeSet<_>>().len());
        let certified: usize = entries.iter().map(|e| e.pairings.len()).sum();
        assert!(certified >= 8, "{certified} certified pairings");
    }

    #[test]
    fn every_declared_solution_is_consistent() {
        for entry in registry() {
            let sol = entry.problem.solution().expect("registry problems declare solutions");
            let r = entry.problem.natural_residual(sol).unwrap();
            assert!(r <= 1e-10, "{}: residual {r}", entry.name);
        }
    }

    #[test]
    fn subproblem_fixed_point_at_each_solution() {
        for entry in registry() {
            let sol = entry.problem.solution().unwrap().to_vec();
            let avi = Avi::linearize(&entry.problem, &sol);
            let z = avi.solve(&sol, None).unwrap().z;
            assert!(
                crate::linalg::dist2(&z, &sol) <= 1e-9,
                "{}: fixed point drifted to {z:?}",
                entry.name
            );
        }
    }

    #[test]
    fn declared_moduli_match_computed_ones() {
        let entries = registry();
        let find = |name: &str| {
            entries.iter().find(|e| e.name == name).unwrap_or_else(|| panic!("{name} missing"))
        };

        // sqrt1-zeromap: 1/|f'(1)| = 0.5
        let e = find("sqrt1-zeromap");
        let sol = e.problem.solution().unwrap().to_vec();
        let avi = Avi::linearize(&e.problem, &sol);
        let lam = strong_regularity_modulus(&avi, &sol, &ModulusOptions::default()).unwrap();
        assert!((lam - 0.5).abs() < 1e-12);
        assert_eq!(e.pairings[0].spec.lambda(), 0.5);

        // ncp2: reduced basic block [2] gives 0.5
        let e = find("ncp2");
        let sol = e.problem.solution().unwrap().to_vec();
        let avi = Avi::linearize(&e.problem, &sol);
        let lam = strong_regularity_modulus(&avi, &sol, &ModulusOptions::default()).unwrap();
        assert!((lam - 0.5).abs() < 1e-12, "ncp2 modulus {lam}");

        // halfspace2: KKT piece norm 4/sqrt(22)
        let e = find("halfspace2");
        let sol = e.problem.solution().unwrap().to_vec();
        let avi = Avi::linearize(&e.problem, &sol);
        let lam = strong_regularity_modulus(&avi, &sol, &ModulusOptions::default()).unwrap();
        assert!(
            (lam - 4.0 / 22.0_f64.sqrt()).abs() < 1e-10,
            "halfspace2 modulus {lam}"
        );

        // degenerate-orthant: max over pieces of {0, 1}
        let e = find("degenerate-orthant");
        let sol = e.problem.solution().unwrap().to_vec();
        let avi = Avi::linearize(&e.problem, &sol);
        let lam = strong_regularity_modulus(&avi, &sol, &ModulusOptions::default()).unwrap();
        assert!((lam - 1.0).abs() < 1e-12);
    }
}
