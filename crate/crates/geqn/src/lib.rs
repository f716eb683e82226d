//! Newton's method for generalized equations f(x) + F(x) ∋ 0, where F is
//! either the zero map (plain nonlinear equations) or the normal cone of a
//! polyhedral convex set (variational inequalities), together with the
//! majorant-function machinery that certifies convergence radii, error
//! envelopes, and solution uniqueness around a known solution.

pub mod avi;
pub mod linalg;
pub mod majorant;
pub mod newton;
pub mod poly;
pub mod probfile;
pub mod problem;
pub mod registry;

pub use avi::{Avi, AviError, AviSolution, LcpResult, LcpStatus};
pub use linalg::{Mat, LinalgError};
pub use majorant::{
    AxiomReport, MajorantError, MajorantForm, MajorantSpec, PsiValues, RadiusReport, RateEnvelope,
};
pub use newton::{
    Certificate, DriverError, IterationTrace, SolveStatus, SolverConfig, UniquenessReport,
};
pub use poly::PolySystem;
pub use probfile::ParseError;
pub use problem::{
    InequalityReport, LipschitzEstimate, ProblemBuilder, ProblemError, ProblemInstance,
    SetDescriptor,
};
