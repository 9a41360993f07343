use std::sync::Arc;

use deviation::{rate_endpoint, Control, DeviationError, RateOptions};
use fbm::{fbm_covariance, TimeGrid};
use fraccalc::{rh_operator, SteppedFunction};
use meanfield::{deterministic_limit, MarginalAtoms, ModelConstants, ModelSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn additive(s: f64) -> ModelSpec {
    let constants = ModelConstants {
        sigma_sup: s.abs(),
        ..ModelConstants::zeros()
    };
    ModelSpec::new(
        1,
        Arc::new(|_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out.fill(0.0)),
        Arc::new(move |_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out[0] = s),
        constants,
    )
    .unwrap()
}

fn linear_drift(a: f64) -> ModelSpec {
    let constants = ModelConstants {
        drift_lipschitz: a.abs(),
        sigma_sup: 1.0,
        ..ModelConstants::zeros()
    };
    ModelSpec::new(
        1,
        Arc::new(move |x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out[0] = -a * x[0]),
        Arc::new(|_x: &[f64], _mu: &MarginalAtoms, out: &mut [f64]| out[0] = 1.0),
        constants,
    )
    .unwrap()
}

fn indicator_gram(cells: TimeGrid, hurst: f64) -> DMatrix<f64> {
    let nc = cells.n_steps();
    DMatrix::from_fn(nc, nc, |c, e| {
        let (a, b) = (cells.node(c), cells.node(c + 1));
        let (u, v) = (cells.node(e), cells.node(e + 1));
        fbm_covariance(b, v, hurst).unwrap() - fbm_covariance(a, v, hurst).unwrap()
            - fbm_covariance(b, u, hurst).unwrap()
            + fbm_covariance(a, u, hurst).unwrap()
    })
}

#[test]
fn hitting_the_limit_endpoint_is_free() {
    let model = additive(1.0);
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let x = deterministic_limit(&model, &[0.2], &grid).unwrap();
    let y = vec![x.value(32, 0)];
    let opts = RateOptions {
        n_cells: Some(16),
        ..RateOptions::default()
    };
    let res = rate_endpoint(&model, &[0.2], 0.75, &grid, &y, &opts).unwrap();
    assert_eq!(res.value, 0.0);
    assert!(res.residual <= 1e-12);
    assert!(res.diagnostics.converged);
    assert!(res.control.h().levels().iter().all(|&v| v == 0.0));
}

#[test]
fn additive_endpoint_rate_matches_the_projection_formula() {
    // b = 0, sigma = 1: the optimal control is a multiple of the full-window
    // indicator, with value (y - x0)^2 / (2 T^{2H})
    let hurst = 0.75;
    let t_end = 1.0;
    let model = additive(1.0);
    let grid = TimeGrid::new(t_end, 32).unwrap();
    let opts = RateOptions {
        n_cells: Some(16),
        ..RateOptions::default()
    };
    let (x0, y) = (0.2, 1.0);
    let res = rate_endpoint(&model, &[x0], hurst, &grid, &[y], &opts).unwrap();
    let closed = (y - x0) * (y - x0) / (2.0 * t_end.powf(2.0 * hurst));
    assert!(res.diagnostics.converged, "notes: {:?}", res.diagnostics.notes);
    assert!(
        (res.value - closed).abs() <= 0.02 * closed,
        "value {} vs closed form {closed}",
        res.value
    );
    // the reported value prices the returned control through the kernel
    let direct = 0.5 * fraccalc::h_inner(res.control.h(), res.control.h(), hurst).unwrap();
    assert!((res.value - direct).abs() <= 1e-9 * (1.0 + direct));
}

#[test]
fn linear_drift_rate_matches_the_qp_oracle() {
    // b(x) = -a x, sigma = 1: the endpoint map is affine in the control, so
    // the exact minimum solves a quadratic program with one linear constraint
    let hurst = 0.75;
    let a = 0.8;
    let model = linear_drift(a);
    let n = 32;
    let nc = 16;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let cells = TimeGrid::new(1.0, nc).unwrap();
    let (x0, y) = (0.3, 1.1);
    let opts = RateOptions {
        n_cells: Some(nc),
        ..RateOptions::default()
    };
    let res = rate_endpoint(&model, &[x0], hurst, &grid, &[y], &opts).unwrap();
    assert!(res.diagnostics.converged, "notes: {:?}", res.diagnostics.notes);

    // oracle: Z(T) - X0(T) = sum_c h_c q_c with
    // q_c = (R_H 1_c)(T) - a int_0^T e^{-a(T-u)} (R_H 1_c)(u) du  (Simpson),
    // minimum value = gap^2 / (2 q' G^{-1} q)
    let stretch = 64;
    let fine = TimeGrid::new(1.0, stretch * nc).unwrap();
    let dt = fine.dt();
    let mut q = DVector::zeros(nc);
    for c in 0..nc {
        let ind = SteppedFunction::indicator(cells, c + 1, 0, 1);
        let sub = SteppedFunction::indicator(cells, c, 0, 1);
        let mut levels = Vec::with_capacity(stretch * nc);
        for cell in 0..stretch * nc {
            levels.push(ind.level(cell / stretch, 0) - sub.level(cell / stretch, 0));
        }
        let hf = SteppedFunction::new(fine, 1, levels).unwrap();
        let rh = rh_operator(&hf, hurst).unwrap();
        let f = |k: usize| (-a * (1.0 - fine.node(k))).exp() * rh.value(k, 0);
        let mut integral = 0.0;
        for k in (0..stretch * nc).step_by(2) {
            integral += dt / 3.0 * (f(k) + 4.0 * f(k + 1) + f(k + 2));
        }
        q[c] = rh.value(stretch * nc, 0) - a * integral;
    }
    let gram = indicator_gram(cells, hurst);
    let sol = gram.lu().solve(&q).unwrap();
    let gap = y - x0 * (-a * 1.0f64).exp();
    let oracle = gap * gap / (2.0 * q.dot(&sol));
    assert!(
        (res.value - oracle).abs() <= 0.02 * oracle,
        "value {} vs QP oracle {oracle}",
        res.value
    );
}

#[test]
fn rate_values_are_nonnegative_and_zero_only_at_the_limit() {
    let model = additive(0.9);
    let grid = TimeGrid::new(0.5, 16).unwrap();
    let opts = RateOptions {
        n_cells: Some(8),
        ..RateOptions::default()
    };
    for &y in &[-0.4, 0.05, 0.8] {
        let res = rate_endpoint(&model, &[0.1], 0.7, &grid, &[y], &opts).unwrap();
        assert!(res.value >= 0.0);
        if (y - 0.1f64).abs() > opts.residual_tol {
            assert!(res.value > 0.0, "y={y} got zero value");
        }
    }
}

#[test]
fn quadratic_energy_agrees_with_the_kernel_inner_product() {
    // the optimizer's Gram route and the analytic kernel route price step
    // functions identically
    let mut rng = ChaCha12Rng::seed_from_u64(507);
    for &hurst in &[0.6, 0.75, 0.9] {
        let cells = TimeGrid::new(1.5, 12).unwrap();
        let gram = indicator_gram(cells, hurst);
        for _ in 0..10 {
            let levels: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = DVector::from_column_slice(&levels);
            let quad = 0.5 * p.dot(&(&gram * &p));
            let c = Control::new(
                SteppedFunction::new(cells, 1, levels).unwrap(),
                hurst,
            )
            .unwrap();
            assert!(
                (quad - c.cost()).abs() <= 1e-9 * (1.0 + c.cost()),
                "H={hurst}: {quad} vs {}",
                c.cost()
            );
        }
    }
}

#[test]
fn unreachable_targets_are_flagged_not_asserted() {
    // sigma = 0 makes the endpoint blind to the control
    let model = additive(0.0);
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let opts = RateOptions {
        n_cells: Some(8),
        ..RateOptions::default()
    };
    let res = rate_endpoint(&model, &[0.0], 0.75, &grid, &[1.0], &opts).unwrap();
    assert!(!res.diagnostics.converged);
    assert!((res.residual - 1.0).abs() < 1e-12);
    assert!(res
        .diagnostics
        .notes
        .iter()
        .any(|n| n.contains("insensitive")));
}

#[test]
fn continuation_schedule_is_reported() {
    let model = additive(1.0);
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let opts = RateOptions {
        n_cells: Some(8),
        ..RateOptions::default()
    };
    let res = rate_endpoint(&model, &[0.0], 0.75, &grid, &[0.5], &opts).unwrap();
    assert_eq!(res.diagnostics.stages_run, 6);
    assert_eq!(res.diagnostics.final_penalty, 1e6);
    assert!(res.diagnostics.inner_iterations > 0);
}

#[test]
fn invalid_configurations_are_rejected() {
    let model = additive(1.0);
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let bad_cells = RateOptions {
        n_cells: Some(7), // does not divide 64
        ..RateOptions::default()
    };
    assert!(matches!(
        rate_endpoint(&model, &[0.0], 0.75, &grid, &[1.0], &bad_cells),
        Err(DeviationError::Domain(_))
    ));
    let no_stages = RateOptions {
        stages: 0,
        ..RateOptions::default()
    };
    assert!(rate_endpoint(&model, &[0.0], 0.75, &grid, &[1.0], &no_stages).is_err());
    let bad_penalty = RateOptions {
        penalty0: -1.0,
        ..RateOptions::default()
    };
    assert!(rate_endpoint(&model, &[0.0], 0.75, &grid, &[1.0], &bad_penalty).is_err());
    assert!(matches!(
        rate_endpoint(&model, &[0.0, 0.0], 0.75, &grid, &[1.0], &RateOptions::default()),
        Err(DeviationError::Shape(_))
    ));
}
