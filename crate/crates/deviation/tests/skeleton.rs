use std::sync::Arc;

use deviation::{skeleton_ldp, skeleton_mdp, Control, DeviationError};
use fbm::{holder_seminorm, TimeGrid};
use fraccalc::{rh_operator, SteppedFunction};
use meanfield::{deterministic_limit, MarginalAtoms, ModelConstants, ModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn additive(dim: usize, s: f64) -> ModelSpec {
    let constants = ModelConstants {
        sigma_sup: s.abs(),
        ..ModelConstants::zeros()
    };
    ModelSpec::new(
        dim,
        Arc::new(|_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out.fill(0.0)),
        Arc::new(move |_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| {
            out.fill(0.0);
            for i in 0..out.len() {
                if i % (dim + 1) == 0 {
                    out[i] = s;
                }
            }
        }),
        constants,
    )
    .unwrap()
}

fn sup_gap(a: &fbm::SamplePath, b: &fbm::SamplePath) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..=a.grid().n_steps() {
        for j in 0..a.dim() {
            worst = worst.max((a.value(k, j) - b.value(k, j)).abs());
        }
    }
    worst
}

#[test]
fn zero_control_reproduces_the_deterministic_limit() {
    let families: Vec<(ModelSpec, Vec<f64>)> = vec![
        (
            ModelSpec::tanh_family(2, 0.1, 0.8, 0.3, 0.4, 0.2, 0.1).unwrap(),
            vec![0.3, -0.2],
        ),
        (
            ModelSpec::measure_independent(1, 0.3, 0.4, 0.5, 0.2).unwrap(),
            vec![0.2],
        ),
        (
            ModelSpec::linear_mean(1, 0.9, 0.4, 0.35).unwrap(),
            vec![0.7],
        ),
    ];
    for (model, x0) in &families {
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let control = Control::zero(grid, model.dim(), 0.75).unwrap();
        let z = skeleton_ldp(model, x0, &control, &grid).unwrap();
        let x = deterministic_limit(model, x0, &grid).unwrap();
        assert!(sup_gap(&z, &x) < 1e-6, "gap {}", sup_gap(&z, &x));
    }
}

#[test]
fn additive_skeleton_is_the_lifted_control() {
    // b = 0, sigma = I: Z - x0 must equal R_H h up to the derivative stencil
    for &hurst in &[0.6, 0.75, 0.85] {
        let n = 64;
        let grid = TimeGrid::new(1.0, n).unwrap();
        let h = SteppedFunction::from_fn(grid, 1, |t, _| 1.0 + 0.5 * (3.0 * t).sin());
        let control = Control::new(h.clone(), hurst).unwrap();
        let model = additive(1, 1.0);
        let z = skeleton_ldp(&model, &[0.3], &control, &grid).unwrap();
        let rh = rh_operator(&h, hurst).unwrap();
        let mut worst = 0.0f64;
        for k in 0..=n {
            worst = worst.max((z.value(k, 0) - 0.3 - rh.value(k, 0)).abs());
        }
        assert!(worst < 1e-5, "H={hurst}: sup gap {worst}");
    }
}

#[test]
fn nonlinear_skeleton_is_stable_under_grid_refinement() {
    let model = ModelSpec::tanh_family(1, 0.1, 0.6, 0.25, 0.5, 0.3, 0.15).unwrap();
    let hurst = 0.75;
    let cells = TimeGrid::new(1.0, 16).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    let levels: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let h = SteppedFunction::new(cells, 1, levels).unwrap();
    let control = Control::new(h, hurst).unwrap();

    let coarse_grid = TimeGrid::new(1.0, 32).unwrap();
    let fine_grid = TimeGrid::new(1.0, 64).unwrap();
    let zc = skeleton_ldp(&model, &[0.2], &control, &coarse_grid).unwrap();
    let zf = skeleton_ldp(&model, &[0.2], &control, &fine_grid).unwrap();
    let mut worst = 0.0f64;
    for k in 0..=32 {
        worst = worst.max((zc.value(k, 0) - zf.value(2 * k, 0)).abs());
    }
    assert!(worst < 1e-3, "refinement gap {worst}");
}

#[test]
fn moderate_skeleton_vanishes_without_control() {
    let model = ModelSpec::linear_mean(2, 0.8, 0.1, 0.4).unwrap();
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let control = Control::zero(grid, 2, 0.8).unwrap();
    let z = skeleton_mdp(&model, &[0.3, 0.1], &control, &grid).unwrap();
    assert!(z.values().iter().all(|&v| v == 0.0));
}

#[test]
fn moderate_skeleton_with_flat_drift_is_the_lifted_control() {
    // grad b = 0, sigma = I: Z' = (R_H h)' from zero, so Z = R_H h
    let model = additive(1, 1.0).with_drift_grad(
        Arc::new(|_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out.fill(0.0)),
        0.0,
    );
    let hurst = 0.75;
    let n = 64;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let h = SteppedFunction::from_fn(grid, 1, |t, _| (2.0 * t).cos());
    let control = Control::new(h.clone(), hurst).unwrap();
    let z = skeleton_mdp(&model, &[0.5], &control, &grid).unwrap();
    let rh = rh_operator(&h, hurst).unwrap();
    let mut worst = 0.0f64;
    for k in 0..=n {
        worst = worst.max((z.value(k, 0) - rh.value(k, 0)).abs());
    }
    assert!(worst < 1e-5, "sup gap {worst}");
}

#[test]
fn moderate_skeleton_matches_variation_of_constants() {
    // scalar grad b = -a: Z(T) = s [ RH(T) - a int_0^T e^{-a(T-u)} RH(u) du ]
    let a = 0.7;
    let s = 1.3;
    let hurst = 0.75;
    let model = ModelSpec::linear_mean(1, a, 0.0, s).unwrap();
    let n = 64;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let h = SteppedFunction::from_fn(grid, 1, |t, _| 1.0 - t);
    let control = Control::new(h.clone(), hurst).unwrap();
    let z = skeleton_mdp(&model, &[0.4], &control, &grid).unwrap();

    // oracle: piecewise-constant extension of h on an 8x grid, Simpson in time
    let stretch = 8;
    let fine = TimeGrid::new(1.0, stretch * n).unwrap();
    let mut levels = Vec::with_capacity(stretch * n);
    for c in 0..stretch * n {
        levels.push(h.level(c / stretch, 0));
    }
    let hf = SteppedFunction::new(fine, 1, levels).unwrap();
    let rhf = rh_operator(&hf, hurst).unwrap();
    let m = stretch * n;
    let dt = fine.dt();
    let f = |k: usize| (-a * (1.0 - fine.node(k))).exp() * rhf.value(k, 0);
    let mut integral = 0.0;
    for k in (0..m).step_by(2) {
        integral += dt / 3.0 * (f(k) + 4.0 * f(k + 1) + f(k + 2));
    }
    let oracle = s * (rhf.value(m, 0) - a * integral);
    assert!(
        (z.value(n, 0) - oracle).abs() < 1e-5,
        "Z(T) = {}, oracle = {oracle}",
        z.value(n, 0)
    );
}

#[test]
fn moderate_skeleton_is_linear_in_the_control() {
    let model = ModelSpec::tanh_family(1, 0.1, 0.5, 0.2, 0.4, 0.25, 0.1).unwrap();
    let hurst = 0.7;
    let grid = TimeGrid::new(1.0, 24).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    let rand_steps = |rng: &mut ChaCha12Rng| {
        let levels: Vec<f64> = (0..24).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SteppedFunction::new(grid, 1, levels).unwrap()
    };
    for _ in 0..5 {
        let h1 = rand_steps(&mut rng);
        let h2 = rand_steps(&mut rng);
        let sum_levels: Vec<f64> = h1
            .levels()
            .iter()
            .zip(h2.levels())
            .map(|(x, y)| x + y)
            .collect();
        let hs = SteppedFunction::new(grid, 1, sum_levels).unwrap();
        let z1 = skeleton_mdp(&model, &[0.3], &Control::new(h1, hurst).unwrap(), &grid).unwrap();
        let z2 = skeleton_mdp(&model, &[0.3], &Control::new(h2, hurst).unwrap(), &grid).unwrap();
        let zs = skeleton_mdp(&model, &[0.3], &Control::new(hs, hurst).unwrap(), &grid).unwrap();
        let mut worst = 0.0f64;
        for k in 0..=24 {
            worst = worst.max((zs.value(k, 0) - z1.value(k, 0) - z2.value(k, 0)).abs());
        }
        assert!(worst < 1e-8, "superposition gap {worst}");
    }
}

#[test]
fn controlled_paths_stay_grid_hoelder_uniformly_on_energy_balls() {
    // controls with cost <= M produce skeletons with bounded Hoelder-H
    // seminorm; the reported constant grows with the energy budget
    let model = ModelSpec::tanh_family(1, 0.1, 0.6, 0.3, 0.5, 0.2, 0.1).unwrap();
    let hurst = 0.75;
    let n = 32;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(6001);
    let mut directions = Vec::new();
    for _ in 0..20 {
        let levels: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        directions.push(
            Control::new(SteppedFunction::new(grid, 1, levels).unwrap(), hurst).unwrap(),
        );
    }
    let constant_at = |m: f64| -> f64 {
        let mut worst = 0.0f64;
        for dir in &directions {
            let c = dir.scaled((m / dir.cost()).sqrt()).unwrap();
            assert!((c.cost() - m).abs() < 1e-9 * (1.0 + m));
            let z = skeleton_ldp(&model, &[0.2], &c, &grid).unwrap();
            let semi = holder_seminorm(&z, 0, n, hurst).unwrap();
            assert!(semi.is_finite());
            worst = worst.max(semi);
        }
        worst
    };
    let c1 = constant_at(1.0);
    let c4 = constant_at(4.0);
    assert!(c1.is_finite() && c1 > 0.0);
    assert!(c4 >= c1, "constant shrank with the budget: {c4} < {c1}");
}

#[test]
fn skeleton_guards_against_blowup() {
    // x' = x^3 from x(0) = 2 leaves any bounded set before t = 1
    let model = ModelSpec::new(
        1,
        Arc::new(|x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| {
            out[0] = x[0] * x[0] * x[0];
        }),
        Arc::new(|_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out.fill(0.0)),
        ModelConstants::zeros(),
    )
    .unwrap();
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let control = Control::zero(grid, 1, 0.75).unwrap();
    match skeleton_ldp(&model, &[2.0], &control, &grid) {
        Err(DeviationError::BlowUp { .. }) | Err(DeviationError::Domain(_)) => {}
        other => panic!("expected a blow-up guard, got {other:?}"),
    }
}

#[test]
fn shape_and_gradient_errors_are_reported() {
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let model = ModelSpec::tanh_family(2, 0.1, 0.5, 0.2, 0.4, 0.2, 0.1).unwrap();
    let control = Control::zero(grid, 2, 0.75).unwrap();
    // x0 dimension mismatch
    assert!(matches!(
        skeleton_ldp(&model, &[0.1], &control, &grid),
        Err(DeviationError::Shape(_))
    ));
    // control dimension mismatch
    let scalar = Control::zero(grid, 1, 0.75).unwrap();
    assert!(matches!(
        skeleton_ldp(&model, &[0.1, 0.2], &scalar, &grid),
        Err(DeviationError::Shape(_))
    ));
    // control cells must divide the internal fine cells (here 64)
    let odd = Control::zero(TimeGrid::new(1.0, 7).unwrap(), 2, 0.75).unwrap();
    assert!(matches!(
        skeleton_ldp(&model, &[0.1, 0.2], &odd, &grid),
        Err(DeviationError::Shape(_))
    ));
    // horizon mismatch
    let short = Control::zero(TimeGrid::new(0.5, 8).unwrap(), 2, 0.75).unwrap();
    assert!(matches!(
        skeleton_ldp(&model, &[0.1, 0.2], &short, &grid),
        Err(DeviationError::Shape(_))
    ));
    // moderate skeleton needs a drift gradient
    let no_grad = additive(1, 1.0);
    let c1 = Control::zero(grid, 1, 0.75).unwrap();
    assert!(matches!(
        skeleton_mdp(&no_grad, &[0.0], &c1, &grid),
        Err(DeviationError::Domain(_))
    ));
}

#[test]
fn coarser_controls_are_extended_piecewise_constantly() {
    // a control on 8 cells must drive a 32-step solve exactly like its
    // explicit 32-cell extension
    let hurst = 0.8;
    let coarse_cells = TimeGrid::new(1.0, 8).unwrap();
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    let levels: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let h8 = SteppedFunction::new(coarse_cells, 1, levels.clone()).unwrap();
    let mut ext = Vec::with_capacity(32);
    for c in 0..32 {
        ext.push(levels[c / 4]);
    }
    let h32 = SteppedFunction::new(grid, 1, ext).unwrap();
    let model = ModelSpec::tanh_family(1, 0.1, 0.4, 0.2, 0.5, 0.2, 0.1).unwrap();
    let z8 = skeleton_ldp(&model, &[0.1], &Control::new(h8, hurst).unwrap(), &grid).unwrap();
    let z32 = skeleton_ldp(&model, &[0.1], &Control::new(h32, hurst).unwrap(), &grid).unwrap();
    assert_eq!(z8.values(), z32.values());
}
