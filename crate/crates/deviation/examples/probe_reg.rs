// scratch probe for the regression-validation paths
use std::sync::Arc;
use std::time::Instant;

use deviation::convergence_rate_check;
use fbm::TimeGrid;
use meanfield::{MarginalAtoms, ModelConstants, ModelSpec};

fn constant_drift(c: f64, s: f64) -> ModelSpec {
    let constants = ModelConstants {
        sigma_sup: s.abs(),
        drift_at_origin_norm: c.abs(),
        ..ModelConstants::zeros()
    };
    ModelSpec::new(
        1,
        Arc::new(move |_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out[0] = c),
        Arc::new(move |_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out[0] = s),
        constants,
    )
    .unwrap()
}

fn main() {
    let model = constant_drift(0.0, 1.0);
    let grid = TimeGrid::new(1.0, 8).unwrap();

    let t = Instant::now();
    let r = convergence_rate_check(&model, &[0.0], 0.75, &grid, &[0.3], 100, 1);
    println!("single eps: {r:?} ({:.2}s)", t.elapsed().as_secs_f64());

    let t = Instant::now();
    let r = convergence_rate_check(&model, &[0.0], 0.75, &grid, &[0.5, 0.4, 0.3], 100, 1);
    println!("non-decade: {r:?} ({:.2}s)", t.elapsed().as_secs_f64());

    let still = constant_drift(0.3, 0.0);
    let t = Instant::now();
    let r = convergence_rate_check(&still, &[0.0], 0.75, &grid, &[0.5, 0.05], 100, 1);
    println!("silent diffusion: {r:?} ({:.2}s)", t.elapsed().as_secs_f64());
}
