use statrs::function::beta::beta;

use crate::error::{check_hurst_rough, FbmError};
use crate::quad::GaussLegendre;

/// Normalizing constant of the Volterra kernel:
/// `C_H = sqrt( H (2H-1) / B(2-2H, H-1/2) )`.
pub fn volterra_c(hurst: f64) -> Result<f64, FbmError> {
    check_hurst_rough(hurst)?;
    let h = hurst;
    Ok((h * (2.0 * h - 1.0) / beta(2.0 - 2.0 * h, h - 0.5)).sqrt())
}

/// Volterra kernel of fBM for H in (1/2, 1):
///
/// `K_H(t,s) = C_H s^{1/2-H} \int_s^t (r-s)^{H-3/2} r^{H-1/2} dr` for t > s,
/// and 0 for t <= s.
///
/// The endpoint singularity `(r-s)^{H-3/2}` is removed by substituting
/// `u = (r-s)^{H-1/2}`, after which the integrand is bounded and a 64-node
/// Gauss-Legendre rule applies.
pub fn volterra_kernel(t: f64, s: f64, hurst: f64) -> Result<f64, FbmError> {
    check_hurst_rough(hurst)?;
    if s <= 0.0 {
        return Err(FbmError::Domain(format!("s must be positive, got {s}")));
    }
    if !t.is_finite() || !s.is_finite() {
        return Err(FbmError::Domain("times must be finite".into()));
    }
    if t <= s {
        return Ok(0.0);
    }
    let a = hurst - 0.5;
    // u = (r-s)^a  =>  (r-s)^{H-3/2} dr = du / a, r = s + u^{1/a}
    let gl = GaussLegendre::new(64);
    let upper = (t - s).powf(a);
    let integral = gl.integrate(0.0, upper, |u| (s + u.powf(1.0 / a)).powf(a)) / a;
    Ok(volterra_c(hurst)? * s.powf(-a) * integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_for_t_at_or_below_s() {
        assert_eq!(volterra_kernel(0.5, 0.8, 0.75).unwrap(), 0.0);
        assert_eq!(volterra_kernel(0.8, 0.8, 0.75).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_domain() {
        assert!(volterra_kernel(1.0, 0.0, 0.75).is_err());
        assert!(volterra_kernel(1.0, 0.5, 0.5).is_err());
        assert!(volterra_c(1.0).is_err());
    }

    #[test]
    fn constant_against_beta_oracle() {
        // C_H at H = 3/4 must equal sqrt(0.75 * 0.5 / B(0.5, 0.25))
        let direct = (0.75_f64 * 0.5 / beta(0.5, 0.25)).sqrt();
        assert!((volterra_c(0.75).unwrap() - direct).abs() < 1e-14);
    }
}
