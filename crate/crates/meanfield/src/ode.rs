use fbm::{SamplePath, TimeGrid};

use crate::error::MeanFieldError;
use crate::model::{MarginalAtoms, ModelSpec};

/// Solve the zero-noise limit equation x' = b(x, delta_x) by classic RK4.
/// Each stage evaluates the drift against the point mass at the stage state.
pub fn deterministic_limit(
    model: &ModelSpec,
    x0: &[f64],
    grid: &TimeGrid,
) -> Result<SamplePath, MeanFieldError> {
    let d = model.dim();
    if x0.len() != d {
        return Err(MeanFieldError::Shape(format!(
            "x0 has dimension {}, model expects {d}",
            x0.len()
        )));
    }
    let n = grid.n_steps();
    let dt = grid.dt();
    let mut path = SamplePath::zeros(*grid, d);
    let mut x = x0.to_vec();
    path.node_values_mut(0).copy_from_slice(&x);

    let mut stage = vec![0.0; d];
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let field = |y: &[f64], out: &mut [f64]| -> Result<(), MeanFieldError> {
        let mu = MarginalAtoms::dirac(y);
        model.drift(y, &mu, out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(MeanFieldError::NonFinite("drift produced a non-finite value".into()));
        }
        Ok(())
    };

    for k in 0..n {
        field(&x, &mut k1)?;
        for i in 0..d {
            stage[i] = x[i] + 0.5 * dt * k1[i];
        }
        field(&stage, &mut k2)?;
        for i in 0..d {
            stage[i] = x[i] + 0.5 * dt * k2[i];
        }
        field(&stage, &mut k3)?;
        for i in 0..d {
            stage[i] = x[i] + dt * k3[i];
        }
        field(&stage, &mut k4)?;
        for i in 0..d {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        path.node_values_mut(k + 1).copy_from_slice(&x);
    }
    Ok(path)
}
