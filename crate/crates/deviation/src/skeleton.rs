use fbm::{SamplePath, TimeGrid};
use fraccalc::{rh_operator, SteppedFunction};
use meanfield::{MarginalAtoms, ModelSpec, BLOW_UP_NORM};

use crate::control::Control;
use crate::error::DeviationError;

/// Refinement factor between the reporting grid and the internal grid used
/// to integrate the skeleton ODEs and to differentiate the lifted control.
pub const REFINE: usize = 4;

/// Derivative samples of `t -> (R_H h)(t)` on the internal fine grid:
/// values at the fine nodes (centered differences, one-sided at the ends)
/// and at the fine-cell midpoints (exact cell slopes), which is what the
/// RK4 stages consume.
struct FineDrive {
    fine: TimeGrid,
    dim: usize,
    v_node: Vec<f64>,
    v_mid: Vec<f64>,
}

impl FineDrive {
    fn node(&self, k: usize) -> &[f64] {
        &self.v_node[k * self.dim..(k + 1) * self.dim]
    }

    fn mid(&self, c: usize) -> &[f64] {
        &self.v_mid[c * self.dim..(c + 1) * self.dim]
    }
}

/// Re-express `h` as a step function on `fine`. Each fine cell must lie
/// inside exactly one cell of `h`, so the cell count of `h` has to divide
/// the fine cell count and the horizons must agree.
fn resample_steps(h: &SteppedFunction, fine: TimeGrid) -> Result<SteppedFunction, DeviationError> {
    let hg = h.grid();
    if (hg.t_end() - fine.t_end()).abs() > 1e-12 * fine.t_end().max(1.0) {
        return Err(DeviationError::Shape(format!(
            "control horizon {} does not match solve horizon {}",
            hg.t_end(),
            fine.t_end()
        )));
    }
    let nf = fine.n_steps();
    let nh = hg.n_steps();
    if nf % nh != 0 {
        return Err(DeviationError::Shape(format!(
            "control cell count {nh} must divide the internal cell count {nf}"
        )));
    }
    let stride = nf / nh;
    let dim = h.dim();
    let mut levels = Vec::with_capacity(nf * dim);
    for c in 0..nf {
        levels.extend_from_slice(h.cell_values(c / stride));
    }
    Ok(SteppedFunction::new(fine, dim, levels)?)
}

fn fine_drive(
    h: &SteppedFunction,
    hurst: f64,
    grid: &TimeGrid,
) -> Result<FineDrive, DeviationError> {
    let fine = TimeGrid::new(grid.t_end(), REFINE * grid.n_steps())?;
    let hf = resample_steps(h, fine)?;
    let rh = rh_operator(&hf, hurst)?;
    let dim = h.dim();
    let nf = fine.n_steps();
    let dt = fine.dt();

    let mut v_node = vec![0.0; (nf + 1) * dim];
    for j in 0..dim {
        v_node[j] = (rh.value(1, j) - rh.value(0, j)) / dt;
        for k in 1..nf {
            v_node[k * dim + j] = (rh.value(k + 1, j) - rh.value(k - 1, j)) / (2.0 * dt);
        }
        v_node[nf * dim + j] = (rh.value(nf, j) - rh.value(nf - 1, j)) / dt;
    }
    let mut v_mid = vec![0.0; nf * dim];
    for c in 0..nf {
        for j in 0..dim {
            v_mid[c * dim + j] = (rh.value(c + 1, j) - rh.value(c, j)) / dt;
        }
    }
    Ok(FineDrive {
        fine,
        dim,
        v_node,
        v_mid,
    })
}

fn guard(x: &[f64], z: &[f64], step: usize) -> Result<(), DeviationError> {
    let norm = x
        .iter()
        .chain(z.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    if !norm.is_finite() || norm > BLOW_UP_NORM {
        return Err(DeviationError::BlowUp { step, norm });
    }
    Ok(())
}

/// Controlled skeleton of the large-deviation principle: solve
///
/// `Z' = b(Z, delta_{X}) + sigma(Z, delta_{X}) (R_H h)'`,  `Z(0) = x0`,
///
/// where `X` is the zero-noise limit co-integrated with the same RK4 stages.
/// The pair runs on a `REFINE`-times finer internal grid and the returned
/// path is the restriction of `Z` to `grid`.
pub fn skeleton_ldp(
    model: &ModelSpec,
    x0: &[f64],
    control: &Control,
    grid: &TimeGrid,
) -> Result<SamplePath, DeviationError> {
    skeleton_ldp_raw(model, x0, control.h(), control.hurst(), grid)
}

/// Same as [`skeleton_ldp`] but taking the raw step function; the endpoint
/// optimizer calls this in its inner loop to avoid pricing the control's
/// energy on every objective evaluation.
pub(crate) fn skeleton_ldp_raw(
    model: &ModelSpec,
    x0: &[f64],
    h: &SteppedFunction,
    hurst: f64,
    grid: &TimeGrid,
) -> Result<SamplePath, DeviationError> {
    let d = model.dim();
    if x0.len() != d || h.dim() != d {
        return Err(DeviationError::Shape(format!(
            "x0 / control dimension ({}, {}) must match the model ({d})",
            x0.len(),
            h.dim()
        )));
    }
    let drive = fine_drive(h, hurst, grid)?;
    let nf = drive.fine.n_steps();
    let dt = drive.fine.dt();

    let mut x = x0.to_vec();
    let mut z = x0.to_vec();
    let mut out = SamplePath::zeros(*grid, d);
    out.node_values_mut(0).copy_from_slice(&z);

    let mut bx = vec![0.0; d];
    let mut bz = vec![0.0; d];
    let mut sz = vec![0.0; d * d];
    let mut kx = vec![vec![0.0; d]; 4];
    let mut kz = vec![vec![0.0; d]; 4];
    let mut xs = vec![0.0; d];
    let mut zs = vec![0.0; d];

    for c in 0..nf {
        let vs = [drive.node(c), drive.mid(c), drive.mid(c), drive.node(c + 1)];
        for stage in 0..4 {
            let (wx, wz) = match stage {
                0 => (0.0, 0.0),
                1 => (0.5, 0.5),
                2 => (0.5, 0.5),
                _ => (1.0, 1.0),
            };
            for i in 0..d {
                xs[i] = x[i] + wx * dt * if stage == 0 { 0.0 } else { kx[stage - 1][i] };
                zs[i] = z[i] + wz * dt * if stage == 0 { 0.0 } else { kz[stage - 1][i] };
            }
            let mu = MarginalAtoms::dirac(&xs);
            model.drift(&xs, &mu, &mut bx);
            model.drift(&zs, &mu, &mut bz);
            model.diffusion(&zs, &mu, &mut sz);
            if bx
                .iter()
                .chain(bz.iter())
                .chain(sz.iter())
                .any(|v| !v.is_finite())
            {
                return Err(DeviationError::Domain(format!(
                    "drift/diffusion non-finite at fine step {c}"
                )));
            }
            for i in 0..d {
                kx[stage][i] = bx[i];
                let mut flow = bz[i];
                for j in 0..d {
                    flow += sz[i * d + j] * vs[stage][j];
                }
                kz[stage][i] = flow;
            }
        }
        for i in 0..d {
            x[i] += dt / 6.0 * (kx[0][i] + 2.0 * kx[1][i] + 2.0 * kx[2][i] + kx[3][i]);
            z[i] += dt / 6.0 * (kz[0][i] + 2.0 * kz[1][i] + 2.0 * kz[2][i] + kz[3][i]);
        }
        guard(&x, &z, c)?;
        if (c + 1) % REFINE == 0 {
            out.node_values_mut((c + 1) / REFINE).copy_from_slice(&z);
        }
    }
    Ok(out)
}

/// Controlled skeleton of the moderate-deviation principle: solve the linear
/// equation
///
/// `Z' = grad_x b(X, delta_X) Z + sigma(X, delta_X) (R_H h)'`,  `Z(0) = 0`,
///
/// with `X` the zero-noise limit, again co-integrated by RK4 on the internal
/// fine grid. Requires the model to carry a drift gradient.
pub fn skeleton_mdp(
    model: &ModelSpec,
    x0: &[f64],
    control: &Control,
    grid: &TimeGrid,
) -> Result<SamplePath, DeviationError> {
    let d = model.dim();
    if !model.has_drift_grad() {
        return Err(DeviationError::Domain(
            "moderate-deviation skeleton needs a model with a drift gradient".into(),
        ));
    }
    if x0.len() != d || control.h().dim() != d {
        return Err(DeviationError::Shape(format!(
            "x0 / control dimension ({}, {}) must match the model ({d})",
            x0.len(),
            control.h().dim()
        )));
    }
    let drive = fine_drive(control.h(), control.hurst(), grid)?;
    let nf = drive.fine.n_steps();
    let dt = drive.fine.dt();

    let mut x = x0.to_vec();
    let mut z = vec![0.0; d];
    let mut out = SamplePath::zeros(*grid, d);

    let mut bx = vec![0.0; d];
    let mut jac = vec![0.0; d * d];
    let mut sx = vec![0.0; d * d];
    let mut kx = vec![vec![0.0; d]; 4];
    let mut kz = vec![vec![0.0; d]; 4];
    let mut xs = vec![0.0; d];
    let mut zs = vec![0.0; d];

    for c in 0..nf {
        let vs = [drive.node(c), drive.mid(c), drive.mid(c), drive.node(c + 1)];
        for stage in 0..4 {
            let w = match stage {
                0 => 0.0,
                1 | 2 => 0.5,
                _ => 1.0,
            };
            for i in 0..d {
                xs[i] = x[i] + w * dt * if stage == 0 { 0.0 } else { kx[stage - 1][i] };
                zs[i] = z[i] + w * dt * if stage == 0 { 0.0 } else { kz[stage - 1][i] };
            }
            let mu = MarginalAtoms::dirac(&xs);
            model.drift(&xs, &mu, &mut bx);
            model.drift_grad(&xs, &mu, &mut jac)?;
            model.diffusion(&xs, &mu, &mut sx);
            if bx
                .iter()
                .chain(jac.iter())
                .chain(sx.iter())
                .any(|v| !v.is_finite())
            {
                return Err(DeviationError::Domain(format!(
                    "drift/gradient/diffusion non-finite at fine step {c}"
                )));
            }
            for i in 0..d {
                kx[stage][i] = bx[i];
                let mut flow = 0.0;
                for j in 0..d {
                    flow += jac[i * d + j] * zs[j] + sx[i * d + j] * vs[stage][j];
                }
                kz[stage][i] = flow;
            }
        }
        for i in 0..d {
            x[i] += dt / 6.0 * (kx[0][i] + 2.0 * kx[1][i] + 2.0 * kx[2][i] + kx[3][i]);
            z[i] += dt / 6.0 * (kz[0][i] + 2.0 * kz[1][i] + 2.0 * kz[2][i] + kz[3][i]);
        }
        guard(&x, &z, c)?;
        if (c + 1) % REFINE == 0 {
            out.node_values_mut((c + 1) / REFINE).copy_from_slice(&z);
        }
    }
    Ok(out)
}
