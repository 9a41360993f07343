use fbm::{GaussLegendre, SamplePath};

use crate::error::{check_alpha, FracError};
use crate::fracops::{frac_derivative_left_at, frac_derivative_right_at};
use crate::types::HolderFunction;

/// Pathwise integral `int_0^T f dg` of Hölder functions via fractional
/// brackets:
///
/// `int f dg = - int_0^T D^a_{0+} f (r) * D^{1-a}_{T-} g_{T-} (r) dr`,
///
/// with both brackets taken in their real form (the complex unit factors of
/// the textbook operators cancel against each other and are never
/// materialized). Requires `lambda + mu > 1`, `lambda > a`, `mu > 1 - a`.
///
/// The brackets of the piecewise-linear interpolants are evaluated in closed
/// form, so the result equals the exact interpolant integral up to Gauss
/// quadrature error. The first and last cells are substituted to remove the
/// `r^{-a}`-type boundary factors.
pub fn zahle_integral(
    f: &HolderFunction,
    g: &HolderFunction,
    alpha: f64,
) -> Result<f64, FracError> {
    check_alpha(alpha)?;
    if f.grid() != g.grid() {
        return Err(FracError::GridMismatch(
            "integrand and integrator must share a grid".into(),
        ));
    }
    if f.dim() != g.dim() {
        return Err(FracError::GridMismatch(
            "integrand and integrator must share a dimension".into(),
        ));
    }
    let (lam, mu) = (f.lambda(), g.lambda());
    if lam + mu <= 1.0 {
        return Err(FracError::Regularity(format!(
            "need lambda + mu > 1, got {lam} + {mu}"
        )));
    }
    if lam <= alpha {
        return Err(FracError::Regularity(format!(
            "need lambda > alpha, got lambda={lam} alpha={alpha}"
        )));
    }
    if mu <= 1.0 - alpha {
        return Err(FracError::Regularity(format!(
            "need mu > 1 - alpha, got mu={mu} alpha={alpha}"
        )));
    }

    let grid = f.grid();
    let n = grid.n_steps();
    let dim = f.dim();
    let b = grid.t_end();
    let anchors: Vec<f64> = (0..dim).map(|j| g.node_value(n, j)).collect();
    let beta_r = 1.0 - alpha; // order of the right bracket

    let integrand = |r: f64| -> f64 {
        let mut acc = 0.0;
        for j in 0..dim {
            let df = frac_derivative_left_at(f, alpha, r, j).expect("r interior");
            let dg =
                frac_derivative_right_at(g, beta_r, anchors[j], r, j).expect("r interior");
            acc += df * dg;
        }
        acc
    };

    let gl = GaussLegendre::new(16);
    let mut total = 0.0;

    // interval list: split a single-cell grid at its midpoint so both
    // endpoint substitutions still apply
    let pieces: Vec<(f64, f64, Sub)> = if n == 1 {
        vec![
            (0.0, 0.5 * b, Sub::Left),
            (0.5 * b, b, Sub::Right),
        ]
    } else {
        let mut v = vec![(0.0, grid.node(1), Sub::Left)];
        for c in 1..n - 1 {
            v.push((grid.node(c), grid.node(c + 1), Sub::None));
        }
        v.push((grid.node(n - 1), b, Sub::Right));
        v
    };

    for (lo, hi, sub) in pieces {
        total += match sub {
            Sub::None => gl.integrate(lo, hi, integrand),
            // r = lo + v^{1/(1-alpha)} flattens the r^{-alpha} boundary factor
            // and the (r-lo)^{1-alpha} kink of the left bracket
            Sub::Left => {
                let p = 1.0 / (1.0 - alpha);
                let upper = (hi - lo).powf(1.0 / p);
                gl.integrate(0.0, upper, |v| {
                    let r = lo + v.powf(p);
                    p * v.powf(p - 1.0) * integrand(r)
                })
            }
            // b - r = w^{1/alpha} flattens the right-bracket factors
            Sub::Right => {
                let q = 1.0 / alpha;
                let upper = (hi - lo).powf(1.0 / q);
                gl.integrate(0.0, upper, |w| {
                    let r = hi - w.powf(q);
                    q * w.powf(q - 1.0) * integrand(r)
                })
            }
        };
    }
    Ok(-total)
}

enum Sub {
    None,
    Left,
    Right,
}

/// Left-point Riemann-Stieltjes sum on the shared grid:
/// `sum_k <f(t_k), g(t_{k+1}) - g(t_k)>`.
pub fn young_integral_rs(f: &SamplePath, g: &SamplePath) -> Result<f64, FracError> {
    if f.grid() != g.grid() {
        return Err(FracError::GridMismatch(
            "paths must share a grid".into(),
        ));
    }
    if f.dim() != g.dim() {
        return Err(FracError::GridMismatch(
            "paths must share a dimension".into(),
        ));
    }
    let n = f.grid().n_steps();
    let dim = f.dim();
    let mut acc = 0.0;
    for k in 0..n {
        for j in 0..dim {
            acc += f.value(k, j) * (g.value(k + 1, j) - g.value(k, j));
        }
    }
    Ok(acc)
}
