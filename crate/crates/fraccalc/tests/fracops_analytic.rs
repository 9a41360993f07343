use fbm::{
    holder_seminorm, sample_fbm, FbmMethod, FbmSamplerConfig, SamplePath, TimeGrid,
};
use fraccalc::{
    frac_derivative_left, frac_derivative_right, frac_integral_left, HolderFunction,
};
use statrs::function::gamma::gamma;

#[test]
fn integral_of_one_is_power_over_gamma() {
    // I^a 1 = x^a / Gamma(1+a); the cellwise scheme evaluates this exactly
    let grid = TimeGrid::new(1.0, 64).unwrap();
    let alpha = 0.5;
    let f = HolderFunction::new(SamplePath::scalar_from_fn(grid, |_| 1.0), 1.0).unwrap();
    let i = frac_integral_left(&f, alpha).unwrap();
    for k in 0..=64 {
        let x = grid.node(k);
        let expect = x.powf(alpha) / gamma(1.0 + alpha);
        assert!(
            (i.value(k, 0) - expect).abs() < 1e-8,
            "k={k}: {} vs {expect}",
            i.value(k, 0)
        );
    }
}

#[test]
fn near_unit_order_integral_tracks_running_integral() {
    // alpha -> 1 consistency: I^{0.999} f vs the running integral of the
    // interpolant (exact trapezoid accumulation)
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let f = HolderFunction::new(
        SamplePath::scalar_from_fn(grid, |t| (2.0 * t).sin() + 0.5),
        1.0,
    )
    .unwrap();
    let i = frac_integral_left(&f, 0.999).unwrap();
    let dt = grid.dt();
    let mut running = 0.0;
    for k in 1..=256 {
        running += 0.5 * dt * (f.node_value(k - 1, 0) + f.node_value(k, 0));
        assert!(
            (i.value(k, 0) - running).abs() < 1e-2,
            "k={k}: {} vs {running}",
            i.value(k, 0)
        );
    }
}

#[test]
fn derivative_of_alpha_power_is_constant_gamma() {
    // D^a x^a = Gamma(1+a); the linear interpolant of the cusp pollutes the
    // early nodes, so the contract is checked from t = 0.25 on
    let grid = TimeGrid::new(1.0, 2048).unwrap();
    for alpha in [0.3, 0.5, 0.7] {
        let f = HolderFunction::new(
            SamplePath::scalar_from_fn(grid, |t| t.powf(alpha)),
            1.0,
        )
        .unwrap();
        let d = frac_derivative_left(&f, alpha).unwrap();
        let expect = gamma(1.0 + alpha);
        for k in 512..=2048 {
            assert!(
                (d.values.value(k, 0) - expect).abs() < 1e-4,
                "alpha={alpha} k={k}: {} vs {expect}",
                d.values.value(k, 0)
            );
        }
    }
}

#[test]
fn inverse_pair_on_smooth_function() {
    // D^a I^a f = f; sup error <= 5e-3 at n = 512
    let grid = TimeGrid::new(1.0, 512).unwrap();
    let f_path = SamplePath::scalar_from_fn(grid, |t| (3.0 * t).sin() + t * t);
    for alpha in [0.2, 0.5, 0.8] {
        let f = HolderFunction::new(f_path.clone(), 1.0).unwrap();
        let i = frac_integral_left(&f, alpha).unwrap();
        let ih = HolderFunction::new(i, 1.0).unwrap();
        let d = frac_derivative_left(&ih, alpha).unwrap();
        assert!(d.endpoint_finite, "I^a f vanishes at 0");
        let mut sup = 0.0f64;
        for k in 0..=512 {
            sup = sup.max((d.values.value(k, 0) - f_path.value(k, 0)).abs());
        }
        assert!(sup <= 5e-3, "alpha={alpha}: sup error {sup}");
    }
}

#[test]
fn right_derivative_of_identity_matches_symbolic_form() {
    // real right bracket of g(t)=t anchored at g(1): -(1-x)^{1-a}/Gamma(2-a)
    let grid = TimeGrid::new(1.0, 128).unwrap();
    let alpha = 0.3;
    let g = HolderFunction::new(SamplePath::scalar_from_fn(grid, |t| t), 1.0).unwrap();
    let d = frac_derivative_right(&g, alpha, &[1.0]).unwrap();
    assert!(d.endpoint_finite);
    for k in 0..128 {
        let x = grid.node(k);
        let expect = -(1.0 - x).powf(1.0 - alpha) / gamma(2.0 - alpha);
        assert!(
            (d.values.value(k, 0) - expect).abs() < 1e-4,
            "k={k}: {} vs {expect}",
            d.values.value(k, 0)
        );
    }
}

#[test]
fn right_derivative_of_fbm_obeys_holder_envelope() {
    // |D^{1-a} g_{T-}(r)| <= C0 ||g||_{0,T,b1} (T-r)^{a+b1-1},
    // C0 = b1 / (Gamma(a) (a+b1-1)); holds for any (a, b1) with a+b1 > 1
    // because the interpolant's exact Hölder seminorm is the grid seminorm
    let grid = TimeGrid::new(1.0, 512).unwrap();
    let cfg = FbmSamplerConfig::new(0.75, FbmMethod::Circulant, 1234);
    let path = sample_fbm(grid, 1, 1, &cfg).unwrap().paths.remove(0);
    let alpha = 0.45;
    let beta1 = 0.7;
    let norm = holder_seminorm(&path, 0, 512, beta1).unwrap();
    let anchor = path.value(512, 0);
    let g = HolderFunction::new(path, beta1).unwrap();
    let d = frac_derivative_right(&g, 1.0 - alpha, &[anchor]).unwrap();
    assert!(d.endpoint_finite);
    let c0 = beta1 / (gamma(alpha) * (alpha + beta1 - 1.0));
    for k in 0..512 {
        let r = grid.node(k);
        let bound = c0 * norm * (1.0 - r).powf(alpha + beta1 - 1.0);
        let v = d.values.value(k, 0).abs();
        assert!(
            v <= bound * (1.0 + 1e-8) + 1e-12,
            "k={k}: |D| = {v} exceeds envelope {bound}"
        );
    }
}
