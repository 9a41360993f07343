use std::sync::Arc;

use fbm::TimeGrid;
use meanfield::{deterministic_limit, MeanFieldError, ModelConstants, ModelSpec};

fn scalar_model(b: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> ModelSpec {
    let drift: Arc<meanfield::DriftFn> =
        Arc::new(move |x, mu, out| out[0] = b(x[0], mu.mean()));
    let diffusion: Arc<meanfield::DiffusionFn> = Arc::new(|_x, _m, out| out.fill(0.0));
    let mut c = ModelConstants::zeros();
    c.drift_lipschitz = 1.0;
    ModelSpec::new(1, drift, diffusion, c).unwrap()
}

#[test]
fn linear_decay_matches_the_exponential() {
    let model = scalar_model(|x, _| -x);
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let path = deterministic_limit(&model, &[1.0], &grid).unwrap();
    for k in 0..=256 {
        let t = grid.node(k);
        assert!(
            (path.value(k, 0) - (-t).exp()).abs() < 1e-6,
            "node {k}: {} vs {}",
            path.value(k, 0),
            (-t).exp()
        );
    }
}

#[test]
fn mean_reverting_drift_is_stationary_at_its_own_point_mass() {
    // b(x, mu) = mean(mu) - x vanishes when mu = delta_x, so every RK4 stage
    // is exactly zero and the path stays put.
    let model = scalar_model(|x, m| m[0] - x);
    let grid = TimeGrid::new(2.0, 64).unwrap();
    let path = deterministic_limit(&model, &[0.7], &grid).unwrap();
    for k in 0..=64 {
        assert_eq!(path.value(k, 0), 0.7);
    }
}

#[test]
fn runge_kutta_agrees_with_an_euler_oracle_at_fine_steps() {
    let model = scalar_model(|x, _| -x);
    let n = 1024;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let path = deterministic_limit(&model, &[1.0], &grid).unwrap();
    let dt = grid.dt();
    let mut euler = 1.0f64;
    let mut worst = 0.0f64;
    for k in 0..n {
        euler += dt * (-euler);
        worst = worst.max((path.value(k + 1, 0) - euler).abs());
    }
    assert!(worst < 1e-3, "worst gap {worst}");
    assert!(worst > 1e-8, "oracle suspiciously close: routes collapsed?");
}

#[test]
fn two_dimensional_rotation_preserves_the_radius() {
    let drift: Arc<meanfield::DriftFn> = Arc::new(|x, _m, out| {
        out[0] = -x[1];
        out[1] = x[0];
    });
    let diffusion: Arc<meanfield::DiffusionFn> = Arc::new(|_x, _m, out| out.fill(0.0));
    let model = ModelSpec::new(2, drift, diffusion, ModelConstants::zeros()).unwrap();
    let grid = TimeGrid::new(3.0, 512).unwrap();
    let path = deterministic_limit(&model, &[1.0, 0.0], &grid).unwrap();
    for k in 0..=512 {
        let r = (path.value(k, 0).powi(2) + path.value(k, 1).powi(2)).sqrt();
        assert!((r - 1.0).abs() < 1e-9);
    }
    let t = grid.t_end();
    assert!((path.value(512, 0) - t.cos()).abs() < 1e-9);
    assert!((path.value(512, 1) - t.sin()).abs() < 1e-9);
}

#[test]
fn non_finite_drift_is_reported() {
    let model = scalar_model(|_x, _| f64::NAN);
    let grid = TimeGrid::new(1.0, 8).unwrap();
    match deterministic_limit(&model, &[0.0], &grid) {
        Err(MeanFieldError::NonFinite(_)) => {}
        other => panic!("expected non-finite error, got {other:?}"),
    }
    assert!(deterministic_limit(&scalar_model(|x, _| -x), &[0.0, 1.0], &grid).is_err());
}
