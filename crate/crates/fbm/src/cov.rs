use crate::error::{check_hurst_open01, FbmError};

/// Covariance of fBM: `E[B_t B_s] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_covariance(t: f64, s: f64, hurst: f64) -> Result<f64, FbmError> {
    check_hurst_open01(hurst)?;
    if t < 0.0 || s < 0.0 {
        return Err(FbmError::Domain(format!(
            "times must be nonnegative, got t={t}, s={s}"
        )));
    }
    Ok(cov_unchecked(t, s, 2.0 * hurst))
}

#[inline]
pub(crate) fn cov_unchecked(t: f64, s: f64, two_h: f64) -> f64 {
    0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Autocovariance of the stationary increment sequence (fGn) at lag `m` on a
/// grid with spacing `dt`:
/// `gamma(m) = dt^{2H} ((m+1)^{2H} - 2 m^{2H} + |m-1|^{2H}) / 2`.
pub fn fgn_autocov(m: usize, hurst: f64, dt: f64) -> f64 {
    let two_h = 2.0 * hurst;
    let m = m as f64;
    0.5 * dt.powf(two_h)
        * ((m + 1.0).powf(two_h) - 2.0 * m.powf(two_h) + (m - 1.0).abs().powf(two_h))
}
