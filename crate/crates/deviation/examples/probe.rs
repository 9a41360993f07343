// scratch accuracy probe; not part of the shipped crate
use std::sync::Arc;
use std::time::Instant;

use deviation::{rate_endpoint, skeleton_ldp, skeleton_mdp, Control, RateOptions};
use fbm::TimeGrid;
use fraccalc::{rh_operator, SteppedFunction};
use meanfield::{deterministic_limit, ModelConstants, ModelSpec};

fn additive(dim: usize, s: f64) -> ModelSpec {
    let mut c = ModelConstants::zeros();
    c.sigma_sup = s;
    ModelSpec::new(
        dim,
        Arc::new(move |_x: &[f64], _mu: &meanfield::MarginalAtoms, out: &mut [f64]| {
            out.iter_mut().for_each(|v| *v = 0.0);
        }),
        Arc::new(move |_x: &[f64], _mu: &meanfield::MarginalAtoms, out: &mut [f64]| {
            out.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..dim {
                out[i * dim + i] = s;
            }
        }),
        c,
    )
    .unwrap()
}

fn main() {
    // 1) b = 0, sigma = I: skeleton should be x0 + R_H h
    for &hurst in &[0.6, 0.75, 0.85] {
        for &n in &[32usize, 64, 128] {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let h = SteppedFunction::from_fn(grid, 1, |t, _| 1.0 + 0.5 * (3.0 * t).sin());
            let control = Control::new(h.clone(), hurst).unwrap();
            let model = additive(1, 1.0);
            let z = skeleton_ldp(&model, &[0.3], &control, &grid).unwrap();
            let rh = rh_operator(&h, hurst).unwrap();
            let mut worst = 0.0f64;
            for k in 0..=n {
                let gap = (z.value(k, 0) - 0.3 - rh.value(k, 0)).abs();
                worst = worst.max(gap);
            }
            println!("additive H={hurst} n={n}: sup |Z - x0 - RH| = {worst:.3e}");
        }
    }

    // 2) h = 0 vs deterministic limit, tanh model
    let model = ModelSpec::tanh_family(2, 0.1, 0.8, 0.3, 0.4, 0.2, 0.1).unwrap();
    for &n in &[16usize, 64] {
        let grid = TimeGrid::new(1.0, n).unwrap();
        let control = Control::zero(grid, 2, 0.75).unwrap();
        let z = skeleton_ldp(&model, &[0.3, -0.2], &control, &grid).unwrap();
        let x = deterministic_limit(&model, &[0.3, -0.2], &grid).unwrap();
        let mut worst = 0.0f64;
        for k in 0..=n {
            for j in 0..2 {
                worst = worst.max((z.value(k, j) - x.value(k, j)).abs());
            }
        }
        println!("h=0 tanh n={n}: sup gap vs RK4 limit = {worst:.3e}");
    }

    // 3) mdp skeleton, scalar grad -a: variation of constants oracle
    let a = 0.7;
    let s = 1.3;
    let hurst = 0.75;
    let model = ModelSpec::linear_mean(1, a, 0.0, s).unwrap();
    println!("has grad: {}", model.has_drift_grad());
    let n = 64;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let h = SteppedFunction::from_fn(grid, 1, |t, _| 1.0 - t);
    let control = Control::new(h.clone(), hurst).unwrap();
    let z = skeleton_mdp(&model, &[0.4], &control, &grid).unwrap();
    // Z(T) = s [ RH(T) - a int_0^T e^{-a(T-u)} RH(u) du ], Simpson on a fine RH
    let stretch = 8;
    let fine = TimeGrid::new(1.0, stretch * n).unwrap();
    let mut levels = Vec::new();
    for c in 0..stretch * n {
        levels.push(h.level(c / stretch, 0));
    }
    let hf = SteppedFunction::new(fine, 1, levels).unwrap();
    let rhf = rh_operator(&hf, hurst).unwrap();
    let t_end = 1.0;
    let m = stretch * n;
    let dt = fine.dt();
    let f = |k: usize| (-(a) * (t_end - fine.node(k))).exp() * rhf.value(k, 0);
    let mut integral = 0.0;
    for k in (0..m).step_by(2) {
        integral += dt / 3.0 * (f(k) + 4.0 * f(k + 1) + f(k + 2));
    }
    let oracle = s * (rhf.value(m, 0) - a * integral);
    println!(
        "mdp linear: Z(T) = {:.8}, oracle = {:.8}, gap = {:.3e}",
        z.value(n, 0),
        oracle,
        (z.value(n, 0) - oracle).abs()
    );

    // 4) rate_endpoint additive closed form
    let t0 = Instant::now();
    let hurst = 0.75;
    let model = additive(1, 1.0);
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let opts = RateOptions {
        n_cells: Some(16),
        ..RateOptions::default()
    };
    let res = rate_endpoint(&model, &[0.2], hurst, &grid, &[1.0], &opts).unwrap();
    let closed = (1.0f64 - 0.2).powi(2) / 2.0; // T = 1
    println!(
        "rate additive: value = {:.6}, closed form = {:.6}, rel gap = {:.3e}, residual = {:.3e}, iters = {}, stages = {}, {:?}, {:.2}s",
        res.value,
        closed,
        (res.value - closed).abs() / closed,
        res.residual,
        res.diagnostics.inner_iterations,
        res.diagnostics.stages_run,
        res.diagnostics.converged,
        t0.elapsed().as_secs_f64()
    );
    for note in &res.diagnostics.notes {
        println!("  note: {note}");
    }

    // 5) rate_endpoint at the limit endpoint: value 0
    let x_lim = deterministic_limit(&model, &[0.2], &grid).unwrap();
    let y = vec![x_lim.value(32, 0)];
    let res0 = rate_endpoint(&model, &[0.2], hurst, &grid, &y, &opts).unwrap();
    println!(
        "rate at limit endpoint: value = {:.3e}, residual = {:.3e}, iters = {}",
        res0.value, res0.residual, res0.diagnostics.inner_iterations
    );
}
