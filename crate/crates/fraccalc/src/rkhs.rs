use fbm::{volterra_c, GaussLegendre, SamplePath};

use crate::error::FracError;
use crate::types::SteppedFunction;

fn check_hurst(hurst: f64) -> Result<(), FracError> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(FracError::Domain(format!(
            "hurst must lie in (1/2,1), got {hurst}"
        )));
    }
    Ok(())
}

/// Exact double integral of `H(2H-1)|t-s|^{2H-2}` over the rectangle
/// `[a1,b1] x [a2,b2]`, via the closed-form antiderivative `-|x|^{2H}/2`.
#[inline]
fn rect_weight(a1: f64, b1: f64, a2: f64, b2: f64, two_h: f64) -> f64 {
    -0.5 * ((b1 - b2).abs().powf(two_h) - (b1 - a2).abs().powf(two_h)
        - (a1 - b2).abs().powf(two_h)
        + (a1 - a2).abs().powf(two_h))
}

/// Inner product of the fBM reproducing-kernel space on step functions:
///
/// `<psi, phi> = H(2H-1) int int |t-s|^{2H-2} <psi(s), phi(t)> ds dt`.
///
/// The singular kernel is integrated analytically over every cell pair, so
/// the only error is float rounding; indicator pairs reproduce the fBM
/// covariance to ~1e-13.
pub fn h_inner(
    psi: &SteppedFunction,
    phi: &SteppedFunction,
    hurst: f64,
) -> Result<f64, FracError> {
    check_hurst(hurst)?;
    if psi.grid() != phi.grid() {
        return Err(FracError::GridMismatch(
            "step functions must share a grid".into(),
        ));
    }
    if psi.dim() != phi.dim() {
        return Err(FracError::GridMismatch(
            "step functions must share a dimension".into(),
        ));
    }
    let grid = psi.grid();
    let n = grid.n_steps();
    let dim = psi.dim();
    let two_h = 2.0 * hurst;
    let mut acc = 0.0;
    for c in 0..n {
        let (a1, b1) = (grid.node(c), grid.node(c + 1));
        for e in 0..n {
            let mut dot = 0.0;
            for j in 0..dim {
                dot += psi.level(c, j) * phi.level(e, j);
            }
            if dot == 0.0 {
                continue;
            }
            acc += dot * rect_weight(a1, b1, grid.node(e), grid.node(e + 1), two_h);
        }
    }
    Ok(acc)
}

/// K* transform of a step function at an arbitrary time `t in (0, T]`:
///
/// `(K* psi)(t) = int_t^T psi(s) dK(s,t)/ds ds` with
/// `dK(s,t)/ds = C_H (s/t)^{H-1/2} (s-t)^{H-3/2}`.
///
/// Each cell integral removes the `(s-t)^{H-3/2}` singularity with the
/// substitution `u = (s-t)^{H-1/2}` and applies a 32-node Gauss rule.
pub fn khstar_at(psi: &SteppedFunction, hurst: f64, t: f64) -> Result<Vec<f64>, FracError> {
    check_hurst(hurst)?;
    let grid = psi.grid();
    if !(t > 0.0 && t <= grid.t_end() * (1.0 + 1e-12)) {
        return Err(FracError::Domain(format!("t={t} outside (0, T]")));
    }
    let a = hurst - 0.5;
    let c_h = volterra_c(hurst)?;
    let n = grid.n_steps();
    let dim = psi.dim();
    let gl = GaussLegendre::new(32);
    let mut out = vec![0.0; dim];
    let t_pow = t.powf(-a);
    for c in 0..n {
        let hi = grid.node(c + 1);
        if hi <= t {
            continue;
        }
        let lo = grid.node(c).max(t);
        let u0 = (lo - t).powf(a);
        let u1 = (hi - t).powf(a);
        // (1/a) int (t + u^{1/a})^a du on [u0, u1]
        let integral = gl.integrate(u0, u1, |u| (t + u.powf(1.0 / a)).powf(a)) / a;
        let w = c_h * t_pow * integral;
        for j in 0..dim {
            out[j] += psi.level(c, j) * w;
        }
    }
    Ok(out)
}

/// K* transform at the grid nodes. The kernel column is not defined at
/// t = 0; node 0 is set to 0 by convention, and node n is 0 because the
/// integration range is empty.
pub fn khstar(psi: &SteppedFunction, hurst: f64) -> Result<SamplePath, FracError> {
    check_hurst(hurst)?;
    let grid = psi.grid();
    let dim = psi.dim();
    let mut out = SamplePath::zeros(grid, dim);
    for k in 1..=grid.n_steps() {
        let vals = khstar_at(psi, hurst, grid.node(k))?;
        for (j, v) in vals.iter().enumerate() {
            out.set(k, j, *v);
        }
    }
    Ok(out)
}

/// Squared L2 norm of `K* psi` over [0, T].
///
/// `|K* psi(t)|^2` behaves like `t^{1-2H}` at the origin; the first cell is
/// substituted `t = w^{1/(2-2H)}`, which makes that factor exactly flat.
pub fn khstar_l2_norm_sq(psi: &SteppedFunction, hurst: f64) -> Result<f64, FracError> {
    check_hurst(hurst)?;
    let grid = psi.grid();
    let n = grid.n_steps();
    let gl = GaussLegendre::new(32);
    let sq = |t: f64| -> f64 {
        khstar_at(psi, hurst, t)
            .expect("t interior")
            .iter()
            .map(|v| v * v)
            .sum()
    };
    let p = 1.0 / (2.0 - 2.0 * hurst);
    let first_hi = grid.node(1).powf(1.0 / p);
    let mut acc = gl.integrate(0.0, first_hi, |w| p * w.powf(p - 1.0) * sq(w.powf(p)));
    for c in 1..n {
        acc += gl.integrate(grid.node(c), grid.node(c + 1), sq);
    }
    Ok(acc)
}

/// Covariance-type operator applied to a step function, at the grid nodes,
/// computed coordinatewise as the inner product against indicator steps:
///
/// `(R_H h)(t_k)_j = < 1_{[0,t_k]} e_j , h >`.
///
/// The cell weights are the same closed-form rectangle integrals as
/// [`h_inner`], accumulated directly against `[0, t_k]`, so the node values
/// are exact up to rounding.
pub fn rh_operator(h: &SteppedFunction, hurst: f64) -> Result<SamplePath, FracError> {
    check_hurst(hurst)?;
    let grid = h.grid();
    let n = grid.n_steps();
    let dim = h.dim();
    let two_h = 2.0 * hurst;
    let mut out = SamplePath::zeros(grid, dim);
    for k in 1..=n {
        let t_k = grid.node(k);
        for c in 0..n {
            let w = rect_weight(0.0, t_k, grid.node(c), grid.node(c + 1), two_h);
            for j in 0..dim {
                let v = out.value(k, j) + h.level(c, j) * w;
                out.set(k, j, v);
            }
        }
    }
    Ok(out)
}
