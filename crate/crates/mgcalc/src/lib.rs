//! Distribution functions, pseudoinverses, and the exact eigensystem of
//! measure Laplacians for atomless probability measures on a compact
//! interval.
//!
//! The second derivative taken with respect to such a measure has a fully
//! explicit eigensystem: eigenvalues `-(pi n)^2` with eigenfunctions
//! `sin(pi n F)` under Dirichlet conditions and `cos(pi n F)` under von
//! Neumann conditions, where `F` is the measure's distribution function.
//! This crate evaluates `F` and its pseudoinverse for smooth, Salem, and
//! self-similar Cantor measures, differentiates and integrates against the
//! measure, and cross-checks the eigensystem with independent oracles.
//!
//! Module map:
//! * [`measures`]: measure descriptions, CDF and pseudoinverse evaluation,
//!   quadrature through the distribution coordinate;
//! * [`calculus`]: numerical measure-derivatives and Laplacians, harmonic
//!   functions, the fundamental-theorem residual;
//! * [`spectral`]: eigenpairs, a Volterra-equation Picard solver as an
//!   independent oracle, eigenvalue counting and Weyl ratios;
//! * [`families`]: the arcsine, Salem, and Cantor worked families with
//!   their identity checks;
//! * [`verify`]: named residual suites with pass/fail reports.
//!
//! The `parallel` feature (on by default) maps grid evaluations across a
//! rayon thread pool; disabling it runs the identical computation on one
//! thread. Reductions are compensated and sequential either way, so results
//! do not depend on the feature.

// Validation guards are written as negated comparisons on purpose:
// `!(x > 0.0)` rejects NaN along with the out-of-range sign.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
mod exec;
pub mod families;
pub mod measures;
mod rng;
pub mod spectral;
pub mod verify;

pub use calculus::{
    mu_derivative, mu_laplacian, representation_residual, HarmonicPair, MuFunction,
};
pub use error::{Error, Result};
pub use measures::{
    integrate_mu, support_gaps, AffineMap, CdfEvaluator, Interval, MeasureSpec, MeasureVariant,
    MuQuadrature, QuadratureGrid, QuadratureRule, ScalarFn,
};
pub use spectral::{
    counting_function, eigen_residual, eigenpair, volterra_solve, weyl_ratio, BoundaryCondition,
    EigenPair, VolterraProblem, VolterraSolution,
};
pub use verify::{measure_suite, run_suite, Check, Suite, VerificationReport, VerifyOptions};
