// scratch MC probe; not part of the shipped crate
use std::sync::Arc;
use std::time::Instant;

use deviation::{convergence_rate_check, mc_deviation_probability, DeviationMode};
use fbm::TimeGrid;
use meanfield::{MarginalAtoms, ModelConstants, ModelSpec};

fn constant_drift(dim: usize, c: f64, s: f64) -> ModelSpec {
    let mut k = ModelConstants::zeros();
    k.sigma_sup = s;
    k.drift_at_origin_norm = c.abs();
    ModelSpec::new(
        dim,
        Arc::new(move |_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| {
            out.iter_mut().for_each(|v| *v = c);
        }),
        Arc::new(move |_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| {
            out.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..dim {
                out[i * dim + i] = s;
            }
        }),
        k,
    )
    .unwrap()
}

fn main() {
    let hurst = 0.75;
    let grid = TimeGrid::new(1.0, 32).unwrap();

    // exact-2H slope: constant drift, constant diffusion
    let model = constant_drift(1, 0.4, 0.8);
    let t0 = Instant::now();
    let rc = convergence_rate_check(
        &model,
        &[0.1],
        hurst,
        &grid,
        &[0.5, 0.25, 0.1, 0.05],
        500,
        2024,
    )
    .unwrap();
    println!(
        "additive slope = {:.12} (2H = {}), gap = {:.3e}, {:.2}s",
        rc.slope,
        2.0 * hurst,
        (rc.slope - 2.0 * hurst).abs(),
        t0.elapsed().as_secs_f64()
    );

    // tanh multiplicative slope
    let model = ModelSpec::tanh_family(1, 0.1, 0.5, 0.3, 0.4, 0.25, 0.15).unwrap();
    let t0 = Instant::now();
    let rc = convergence_rate_check(
        &model,
        &[0.2],
        hurst,
        &grid,
        &[0.5, 0.25, 0.1, 0.05],
        500,
        2024,
    )
    .unwrap();
    println!(
        "tanh slope = {:.6} (floor H - 0.2 = {}), {:.2}s",
        rc.slope,
        hurst - 0.2,
        t0.elapsed().as_secs_f64()
    );

    // ldp probabilities, additive model: transformed vs delta^2 / (2 T^{2H})
    let model = constant_drift(1, 0.0, 1.0);
    let delta = 1.1;
    let t0 = Instant::now();
    let est = mc_deviation_probability(
        &model,
        &[0.0],
        hurst,
        &grid,
        &[0.4, 0.3, 0.2],
        delta,
        10_000,
        DeviationMode::Ldp,
        None,
        99,
    )
    .unwrap();
    let bound = delta * delta / 2.0; // T = 1
    for e in &est.per_epsilon {
        println!(
            "ldp eps={}: hits={} p={:.4} wil=[{:.4},{:.4}] transformed={:?} (bound {:.4})",
            e.epsilon, e.hits, e.p_hat, e.wilson_low, e.wilson_high, e.transformed, bound
        );
    }
    println!("ldp wallclock {:.2}s", t0.elapsed().as_secs_f64());

    // mdp monotone in delta, tanh model
    let model = ModelSpec::tanh_family(1, 0.1, 0.5, 0.3, 0.4, 0.25, 0.15).unwrap();
    let t0 = Instant::now();
    for delta in [0.5, 1.0, 1.5] {
        let est = mc_deviation_probability(
            &model,
            &[0.2],
            hurst,
            &grid,
            &[0.5, 0.3],
            delta,
            2000,
            DeviationMode::Mdp,
            None,
            7,
        )
        .unwrap();
        let ps: Vec<f64> = est.per_epsilon.iter().map(|e| e.p_hat).collect();
        println!("mdp delta={delta}: p_hat = {ps:?}");
    }
    println!("mdp wallclock {:.2}s", t0.elapsed().as_secs_f64());
}
