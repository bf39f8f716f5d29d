//! Numerical spectral geometry on warped-product model manifolds.
//!
//! Computes first Dirichlet eigenvalues of geodesic balls in hyperbolic space
//! and of bands in exponential and cosh warped products, together with the
//! Rayleigh-quotient upper bound and the `u^{-n/2}·sin(a·ln(εu))` lower bound
//! for hyperbolic balls, and least-squares fits of `λ₁(R) ≈ c₀ + c₂/R² + c₃/R³`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod lee_bound;
pub mod models;
pub mod ode;
pub mod quadrature;
pub mod radial_solver;
pub mod rayleigh;

pub use asymptotics::{
    fit_expansion, two_term_report, ExpansionFit, TwoTermReport, TwoTermTolerances,
};
pub use lee_bound::{ball_lower_bound, LeeEigenfunction, LeeParameters};
pub use models::{DomainKind, DomainSpec, ModelSelector, RadialFunction, WarpedModel, Warping};
pub use radial_solver::{eigenfunction_samples, fd_oracle, first_eigenvalue, sweep, EigenEstimate};
pub use rayleigh::{
    hyperbolic_upper_bound, rayleigh_quotient, sin2_exp_integral, UpperBoundReport,
};
