use fbm::SamplePath;
use statrs::function::gamma::gamma;

use crate::error::{check_alpha, FracError};
use crate::types::HolderFunction;

/// Output of a Weyl-form fractional derivative on the grid.
///
/// The derivative diverges at its anchor endpoint (node 0 for the left
/// operator, node n for the right one) unless the function vanishes there;
/// in the divergent case `endpoint_finite` is false and that node of
/// `values` holds a placeholder 0 which must not be read.
#[derive(Debug, Clone)]
pub struct WeylDerivative {
    pub values: SamplePath,
    pub endpoint_finite: bool,
}

/// Left fractional integral of order `alpha` of the piecewise-linear
/// interpolant, at the grid nodes:
/// `(I^a f)(x) = (1/Gamma(a)) int_0^x f(y) (x-y)^{a-1} dy`.
///
/// Each cell is integrated in closed form, so the only error relative to the
/// continuum operator is the interpolation error of the input.
pub fn frac_integral_left(f: &HolderFunction, alpha: f64) -> Result<SamplePath, FracError> {
    check_alpha(alpha)?;
    let grid = f.grid();
    let dim = f.dim();
    let inv_gamma = 1.0 / gamma(alpha);
    let mut out = SamplePath::zeros(grid, dim);
    for k in 1..=grid.n_steps() {
        let x = grid.node(k);
        for j in 0..dim {
            let mut acc = 0.0;
            for c in 0..k {
                let u0 = x - grid.node(c);
                let u1 = x - grid.node(c + 1);
                let m = f.slope(c, j);
                // f-hat(y) = a_lin - m u with u = x - y
                let a_lin = f.node_value(c, j) + m * u0;
                acc += a_lin * (u0.powf(alpha) - u1.powf(alpha)) / alpha
                    - m * (u0.powf(alpha + 1.0) - u1.powf(alpha + 1.0)) / (alpha + 1.0);
            }
            out.set(k, j, acc * inv_gamma);
        }
    }
    Ok(out)
}

/// Left Weyl fractional derivative of the interpolant at the grid nodes:
/// `(D^a f)(x) = (1/Gamma(1-a)) [ f(x)/x^a + a int_0^x (f(x)-f(y))/(x-y)^{a+1} dy ]`.
///
/// Requires the declared Hölder exponent to exceed `alpha`.
pub fn frac_derivative_left(f: &HolderFunction, alpha: f64) -> Result<WeylDerivative, FracError> {
    check_alpha(alpha)?;
    if f.lambda() <= alpha {
        return Err(FracError::Regularity(format!(
            "need holder exponent > alpha, got lambda={} alpha={alpha}",
            f.lambda()
        )));
    }
    let grid = f.grid();
    let dim = f.dim();
    let mut out = SamplePath::zeros(grid, dim);
    let mut endpoint_finite = true;
    for j in 0..dim {
        if f.node_value(0, j) != 0.0 {
            // true limit is +/- infinity; node 0 stays a placeholder 0
            endpoint_finite = false;
        }
        for k in 1..=grid.n_steps() {
            out.set(k, j, weyl_left_node(f, alpha, k, j));
        }
    }
    Ok(WeylDerivative {
        values: out,
        endpoint_finite,
    })
}

fn weyl_left_node(f: &HolderFunction, alpha: f64, k: usize, j: usize) -> f64 {
    let grid = f.grid();
    let x = grid.node(k);
    let fk = f.node_value(k, j);
    let mut s = 0.0;
    // cells strictly below the adjacent one: u1 > 0, generic closed form
    for c in 0..k.saturating_sub(1) {
        let u0 = x - grid.node(c);
        let u1 = x - grid.node(c + 1);
        let m = f.slope(c, j);
        let cc = fk - (f.node_value(c, j) + m * u0);
        s += cc * (u1.powf(-alpha) - u0.powf(-alpha)) / alpha
            + m * (u0.powf(1.0 - alpha) - u1.powf(1.0 - alpha)) / (1.0 - alpha);
    }
    // adjacent cell: the constant part cancels exactly (f(x) is the linear
    // extension of this cell), leaving only the slope term; writing it this
    // way avoids 0 * infinity at u1 = 0
    let m_top = f.slope(k - 1, j);
    s += m_top * grid.dt().powf(1.0 - alpha) / (1.0 - alpha);
    (fk * x.powf(-alpha) + alpha * s) / gamma(1.0 - alpha)
}

/// Left Weyl derivative of the interpolant at an arbitrary point
/// `r in (0, T]` (used by the quadrature of the pathwise integral).
/// Points within 1e-9 cells of a node are snapped to the node.
pub fn frac_derivative_left_at(
    f: &HolderFunction,
    alpha: f64,
    r: f64,
    j: usize,
) -> Result<f64, FracError> {
    check_alpha(alpha)?;
    let grid = f.grid();
    let dt = grid.dt();
    let pos = r / dt;
    let nearest = pos.round();
    if nearest == 0.0 && pos.abs() < 1e-9 {
        return Err(FracError::Domain("r must be strictly positive".into()));
    }
    if r < 0.0 || r > grid.t_end() * (1.0 + 1e-12) {
        return Err(FracError::Domain(format!("r={r} outside (0, T]")));
    }
    let (c_top, r_eff) = if (pos - nearest).abs() < 1e-9 {
        (nearest as usize - 1, grid.node(nearest as usize))
    } else {
        (pos.floor() as usize, r)
    };
    let f_r = f.node_value(c_top, j) + f.slope(c_top, j) * (r_eff - grid.node(c_top));
    let mut s = 0.0;
    // consecutive cells share a node power: u1 of cell c is u0 of cell c+1
    let mut u0 = r_eff;
    let mut p0 = u0.powf(-alpha); // u0^{-alpha}; u0^{1-alpha} = p0 * u0
    for c in 0..c_top {
        let u1 = r_eff - grid.node(c + 1);
        let p1 = u1.powf(-alpha);
        let m = f.slope(c, j);
        let cc = f_r - (f.node_value(c, j) + m * u0);
        s += cc * (p1 - p0) / alpha + m * (p0 * u0 - p1 * u1) / (1.0 - alpha);
        u0 = u1;
        p0 = p1;
    }
    s += f.slope(c_top, j) * (r_eff - grid.node(c_top)).powf(1.0 - alpha) / (1.0 - alpha);
    Ok((f_r * r_eff.powf(-alpha) + alpha * s) / gamma(1.0 - alpha))
}

/// Right Weyl fractional derivative (real bracket, the complex unit factor of
/// the textbook right-sided operator is dropped; it cancels in the pathwise
/// integral) of the interpolant shifted by `b_anchor`, at the grid nodes:
///
/// `(1/Gamma(1-a)) [ (f(x)-anchor)/(b-x)^a + a int_x^b (f(x)-f(y))/(y-x)^{a+1} dy ]`.
pub fn frac_derivative_right(
    f: &HolderFunction,
    alpha: f64,
    b_anchor: &[f64],
) -> Result<WeylDerivative, FracError> {
    check_alpha(alpha)?;
    if f.lambda() <= alpha {
        return Err(FracError::Regularity(format!(
            "need holder exponent > alpha, got lambda={} alpha={alpha}",
            f.lambda()
        )));
    }
    let grid = f.grid();
    let dim = f.dim();
    if b_anchor.len() != dim {
        return Err(FracError::Domain(format!(
            "anchor length {} != dim {dim}",
            b_anchor.len()
        )));
    }
    let n = grid.n_steps();
    let mut out = SamplePath::zeros(grid, dim);
    let mut endpoint_finite = true;
    for j in 0..dim {
        if f.node_value(n, j) != b_anchor[j] {
            endpoint_finite = false;
        }
        for k in 0..n {
            out.set(k, j, weyl_right_node(f, alpha, b_anchor[j], k, j));
        }
    }
    Ok(WeylDerivative {
        values: out,
        endpoint_finite,
    })
}

fn weyl_right_node(f: &HolderFunction, alpha: f64, anchor: f64, k: usize, j: usize) -> f64 {
    let grid = f.grid();
    let n = grid.n_steps();
    let x = grid.node(k);
    let b = grid.t_end();
    let fk = f.node_value(k, j);
    let mut s = 0.0;
    for c in (k + 1)..n {
        let u0 = grid.node(c) - x;
        let u1 = grid.node(c + 1) - x;
        let m = f.slope(c, j);
        // f-hat(y) = a_lin + m u with u = y - x
        let cc = fk - (f.node_value(c, j) - m * u0);
        s += cc * (u0.powf(-alpha) - u1.powf(-alpha)) / alpha
            - m * (u1.powf(1.0 - alpha) - u0.powf(1.0 - alpha)) / (1.0 - alpha);
    }
    // adjacent cell above: constant part cancels exactly
    let m_bot = f.slope(k, j);
    s -= m_bot * grid.dt().powf(1.0 - alpha) / (1.0 - alpha);
    ((fk - anchor) * (b - x).powf(-alpha) + alpha * s) / gamma(1.0 - alpha)
}

/// Right Weyl derivative (real bracket) at an arbitrary `r in [0, T)`;
/// near-node points snap to the node.
pub fn frac_derivative_right_at(
    f: &HolderFunction,
    alpha: f64,
    anchor: f64,
    r: f64,
    j: usize,
) -> Result<f64, FracError> {
    check_alpha(alpha)?;
    let grid = f.grid();
    let n = grid.n_steps();
    let dt = grid.dt();
    let b = grid.t_end();
    let pos = r / dt;
    let nearest = pos.round();
    if nearest as usize >= n && (pos - nearest).abs() < 1e-9 {
        return Err(FracError::Domain("r must be strictly below T".into()));
    }
    if r < -1e-12 * b || r >= b {
        return Err(FracError::Domain(format!("r={r} outside [0, T)")));
    }
    let (c_bot, r_eff) = if (pos - nearest).abs() < 1e-9 {
        (nearest as usize, grid.node(nearest as usize))
    } else {
        (pos.floor() as usize, r)
    };
    let f_r = f.node_value(c_bot, j) + f.slope(c_bot, j) * (r_eff - grid.node(c_bot));
    let mut s = 0.0;
    // carry shared node powers upward: u0 of cell c is u1 of cell c-1
    let mut u0 = grid.node(c_bot + 1) - r_eff;
    let mut p0 = u0.powf(-alpha);
    for c in (c_bot + 1)..n {
        let u1 = grid.node(c + 1) - r_eff;
        let p1 = u1.powf(-alpha);
        let m = f.slope(c, j);
        let cc = f_r - (f.node_value(c, j) - m * u0);
        s += cc * (p0 - p1) / alpha - m * (p1 * u1 - p0 * u0) / (1.0 - alpha);
        u0 = u1;
        p0 = p1;
    }
    s -= f.slope(c_bot, j) * (grid.node(c_bot + 1) - r_eff).powf(1.0 - alpha) / (1.0 - alpha);
    Ok(((f_r - anchor) * (b - r_eff).powf(-alpha) + alpha * s) / gamma(1.0 - alpha))
}
