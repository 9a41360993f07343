//! Large- and moderate-deviation apparatus for the mean-field equation:
//! controlled skeleton solvers, the Cameron-Martin energy functional,
//! penalty-continuation rate minimization at the endpoint, and Monte Carlo
//! probes of the deviation probabilities and strong convergence rate.

pub mod control;
pub mod error;
pub mod mc;
pub mod rate;
pub mod skeleton;

pub use control::{cameron_martin_cost, Control};
pub use error::DeviationError;
pub use mc::{
    convergence_rate_check, mc_deviation_probability, ConvergenceRate, DeviationEstimate,
    DeviationMode, EpsilonEstimate, ZetaSpec,
};
pub use rate::{rate_endpoint, OptimizerDiagnostics, RateOptions, RateResult};
pub use skeleton::{skeleton_ldp, skeleton_mdp, REFINE};
