//! Fractional Riemann-Liouville operators on piecewise-linear grid data, the
//! pathwise fractional-bracket integral, and the reproducing-kernel machinery
//! of fBM with H in (1/2, 1): the singular inner product, the K* transform
//! and the covariance-type operator R_H.
//!
//! All kernels are integrated cell-by-cell with closed-form antiderivatives;
//! quadrature appears only where an integrand is genuinely transcendental.

pub mod error;
pub mod fracops;
pub mod rkhs;
pub mod types;
pub mod zahle;

pub use error::FracError;
pub use fracops::{
    frac_derivative_left, frac_derivative_left_at, frac_derivative_right,
    frac_derivative_right_at, frac_integral_left, WeylDerivative,
};
pub use rkhs::{h_inner, khstar, khstar_at, khstar_l2_norm_sq, rh_operator};
pub use types::{HolderFunction, SteppedFunction};
pub use zahle::{young_integral_rs, zahle_integral};
