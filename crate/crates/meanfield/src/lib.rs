//! Solvers for distribution-dependent SDEs driven by fractional Brownian
//! motion with Hurst parameter above 1/2: the zero-noise limit ODE, frozen-law
//! Euler solves, interacting particle systems, and the law-freeze fixed-point
//! iteration, together with the closed-form contraction and moment
//! diagnostics that justify the window lengths.

mod constants;
mod error;
mod exponents;
mod fixpoint;
mod frozen;
mod model;
mod ode;

pub use constants::{
    contraction_step, lambda_constants, moment_bound_g, sup_norm_bound, Lambdas,
};
pub use error::MeanFieldError;
pub use exponents::{choose_exponents, ExponentSet, HURST_FLOOR};
pub use fixpoint::{law_fixpoint, law_fixpoint_driven, FixpointReport, WindowPolicy};
pub use frozen::{
    particle_system, particle_system_driven, solve_frozen, solve_frozen_many, X0Sampler,
    BLOW_UP_NORM,
};
pub use model::{
    DiffusionFn, DriftFn, DriftGradFn, MarginalAtoms, ModelConstants, ModelSpec,
    TANH_CURVATURE_SUP,
};
pub use ode::deterministic_limit;
