use fbm::{fbm_covariance, volterra_kernel, GaussLegendre};

/// Oracle quadrature of `int_0^{s /\ t} K(t,r) K(s,r) dr`.
///
/// The product behaves like r^{1-2H} at r -> 0; substituting r = v^p with
/// p = 1/(2-2H) flattens that factor exactly. The remaining kink
/// (s-r)^{H-1/2} at the upper endpoint is handled by a smoothstep-graded
/// mesh clustered at both ends.
fn kernel_product_integral(t: f64, s: f64, h: f64) -> f64 {
    let p = 1.0 / (2.0 - 2.0 * h);
    let upper_r = s.min(t);
    let upper_v = upper_r.powf(1.0 / p);
    let gl = GaussLegendre::new(32);
    let m = 100;
    let edges: Vec<f64> = (0..=m)
        .map(|i| {
            let u = i as f64 / m as f64;
            // quintic smoothstep: clusters nodes at both endpoints
            upper_v * (u * u * u * (10.0 - 15.0 * u + 6.0 * u * u))
        })
        .collect();
    let mut acc = 0.0;
    for w in edges.windows(2) {
        acc += gl.integrate(w[0], w[1], |v| {
            let r = v.powf(p);
            p * volterra_kernel(t, r, h).unwrap()
                * volterra_kernel(s, r, h).unwrap()
                * r.powf(2.0 * h - 1.0)
        });
    }
    acc
}

#[test]
fn integral_representation_matches_covariance() {
    let h = 0.7;
    let (t, s) = (1.0, 0.5);
    let lhs = kernel_product_integral(t, s, h);
    let rhs = fbm_covariance(t, s, h).unwrap();
    assert!(
        (lhs - rhs).abs() < 1e-6,
        "kernel product integral {lhs} vs covariance {rhs}"
    );
}

#[test]
fn integral_representation_other_points() {
    for (t, s, h) in [(1.0, 1.0, 0.75), (2.0, 0.7, 0.65), (0.9, 0.4, 0.85)] {
        let lhs = kernel_product_integral(t, s, h);
        let rhs = fbm_covariance(t, s, h).unwrap();
        assert!(
            (lhs - rhs).abs() < 5e-6,
            "t={t} s={s} h={h}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn kernel_is_nonnegative_and_increasing_in_t() {
    let h = 0.75;
    let s = 0.4;
    let mut prev = 0.0;
    for i in 1..=20 {
        let t = s + 0.05 * i as f64;
        let k = volterra_kernel(t, s, h).unwrap();
        assert!(k >= prev, "K_H(t,s) must be nondecreasing in t");
        prev = k;
    }
}
