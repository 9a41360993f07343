use fbm::{fbm_covariance, holder_seminorm, volterra_kernel, TimeGrid};
use fraccalc::{h_inner, khstar_at, khstar_l2_norm_sq, rh_operator, SteppedFunction};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

/// Indicator inner products must reproduce the two-point covariance exactly:
/// the rectangle weights are the closed-form double integral of
/// `H(2H-1)|u-v|^{2H-2}`, so only rounding separates the two routes.
#[test]
fn indicator_inner_products_reproduce_covariance() {
    let grid = TimeGrid::new(1.0, 64).unwrap();
    for hurst in [0.65, 0.8] {
        for (ki, kj) in [(64, 64), (17, 50), (1, 64), (32, 32), (3, 4)] {
            let a = SteppedFunction::indicator(grid, ki, 0, 1);
            let b = SteppedFunction::indicator(grid, kj, 0, 1);
            let got = h_inner(&a, &b, hurst).unwrap();
            let want = fbm_covariance(grid.node(ki), grid.node(kj), hurst).unwrap();
            assert!(
                (got - want).abs() < 1e-10,
                "H={hurst} ({ki},{kj}): {got} vs {want}"
            );
        }
    }
}

#[test]
fn coordinates_are_orthogonal() {
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let a = SteppedFunction::indicator(grid, 20, 0, 2);
    let b = SteppedFunction::indicator(grid, 20, 1, 2);
    assert_eq!(h_inner(&a, &b, 0.75).unwrap(), 0.0);
}

#[test]
fn inner_product_is_symmetric_and_bilinear() {
    let grid = TimeGrid::new(1.5, 40).unwrap();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
    let mk = |rng: &mut rand_chacha::ChaCha12Rng| {
        SteppedFunction::new(
            grid,
            2,
            (0..80).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    };
    let phi = mk(&mut rng);
    let psi = mk(&mut rng);
    let chi = mk(&mut rng);
    let h = 0.7;

    let pq = h_inner(&phi, &psi, h).unwrap();
    let qp = h_inner(&psi, &phi, h).unwrap();
    assert!((pq - qp).abs() <= 1e-12);

    // 2.5*phi - 0.75*psi against chi
    let combo = SteppedFunction::new(
        grid,
        2,
        phi.levels()
            .iter()
            .zip(psi.levels())
            .map(|(a, b)| 2.5 * a - 0.75 * b)
            .collect(),
    )
    .unwrap();
    let lhs = h_inner(&combo, &chi, h).unwrap();
    let rhs = 2.5 * h_inner(&phi, &chi, h).unwrap() - 0.75 * h_inner(&psi, &chi, h).unwrap();
    assert!(
        (lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
        "{lhs} vs {rhs}"
    );
}

#[test]
fn gram_matrices_are_positive_definite() {
    let grid = TimeGrid::new(1.0, 24).unwrap();
    for hurst in [0.6, 0.75, 0.9] {
        let ind: Vec<_> = (1..=12)
            .map(|k| SteppedFunction::indicator(grid, 2 * k, 0, 1))
            .collect();
        let mut g = DMatrix::zeros(12, 12);
        for i in 0..12 {
            for j in 0..12 {
                g[(i, j)] = h_inner(&ind[i], &ind[j], hurst).unwrap();
            }
        }
        let shifted = g + DMatrix::identity(12, 12) * 1e-10;
        assert!(
            nalgebra::Cholesky::new(shifted).is_some(),
            "H={hurst}: Gram matrix not positive semidefinite"
        );
    }
}

/// Norm comparison with L^2: `|psi|_H^2 <= 2 H T^{2H-1} |psi|_{L^2}^2`.
#[test]
fn h_norm_dominated_by_l2_norm() {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
    for (t_end, hurst) in [(1.0, 0.65), (1.0, 0.75), (2.0, 0.85)] {
        let grid = TimeGrid::new(t_end, 25).unwrap();
        for _ in 0..100 {
            let psi = SteppedFunction::new(
                grid,
                2,
                (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let h_sq = h_inner(&psi, &psi, hurst).unwrap();
            let bound = 2.0 * hurst * t_end.powf(2.0 * hurst - 1.0) * psi.l2_norm_sq();
            assert!(h_sq >= -1e-12, "norm^2 must be nonnegative: {h_sq}");
            assert!(
                h_sq <= bound * (1.0 + 1e-10),
                "H={hurst} T={t_end}: {h_sq} > {bound}"
            );
        }
    }
}

/// The adjoint-kernel transform of an indicator `1_{[0,u)}` evaluated at
/// `t < u` is the Volterra kernel `K(u, t)` itself.
#[test]
fn khstar_of_indicator_is_volterra_kernel() {
    let grid = TimeGrid::new(1.0, 64).unwrap();
    for hurst in [0.65, 0.8] {
        let psi = SteppedFunction::indicator(grid, 48, 0, 1);
        for k in [3, 17, 30, 44] {
            let t = grid.node(k);
            let got = khstar_at(&psi, hurst, t).unwrap()[0];
            let want = volterra_kernel(grid.node(48), t, hurst).unwrap();
            assert!(
                (got - want).abs() < 1e-5,
                "H={hurst} t={t}: {got} vs {want}"
            );
        }
        // past the indicator's support the transform vanishes
        let beyond = khstar_at(&psi, hurst, grid.node(56)).unwrap()[0];
        assert!(beyond.abs() < 1e-12);
    }
}

/// Transfer isometry: `|K* psi|_{L^2}^2 = |psi|_H^2`. The two sides are
/// computed by entirely different quadratures (kernel transform + L^2 norm
/// versus closed-form rectangle weights).
#[test]
fn khstar_l2_norm_matches_h_norm() {
    let grid = TimeGrid::new(1.0, 32).unwrap();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
    for hurst in [0.7, 0.8] {
        for trial in 0..3 {
            let psi = SteppedFunction::new(
                grid,
                1,
                (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let via_kernel = khstar_l2_norm_sq(&psi, hurst).unwrap();
            let via_weights = h_inner(&psi, &psi, hurst).unwrap();
            assert!(
                (via_kernel - via_weights).abs() <= 1e-4 * via_weights.abs().max(1e-6),
                "H={hurst} trial={trial}: {via_kernel} vs {via_weights}"
            );
        }
    }
}

/// The covariance operator agrees with inner products against indicators:
/// `(R_H h)(t_k)_j = <h_j, 1_{[0,t_k)}>_H`.
#[test]
fn covariance_operator_matches_indicator_pairings() {
    let grid = TimeGrid::new(1.0, 16).unwrap();
    let hurst = 0.75;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
    let h = SteppedFunction::new(
        grid,
        2,
        (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap();
    let rh = rh_operator(&h, hurst).unwrap();
    assert_eq!(rh.value(0, 0), 0.0);
    for k in [5, 11, 16] {
        for j in 0..2 {
            let coord = SteppedFunction::new(
                grid,
                1,
                (0..16).map(|c| h.level(c, j)).collect(),
            )
            .unwrap();
            let ind = SteppedFunction::indicator(grid, k, 0, 1);
            let want = h_inner(&coord, &ind, hurst).unwrap();
            let got = rh.value(k, j);
            assert!(
                (got - want).abs() < 1e-10,
                "k={k} j={j}: {got} vs {want}"
            );
        }
    }
    // images of the covariance operator are smooth enough to have finite
    // Hölder brackets just below 1 (here capped at the norm's validity range)
    let semi = holder_seminorm(&rh, 0, 16, 0.99).unwrap();
    assert!(semi.is_finite());
}
