use matconc::bounds::{BoundCurve, BoundKind};
use matconc::matcore::{dilation, singular_values, CMat, HermitianMatrix, RectMatrix, SuperOperator, C64};
use matconc::rng;
use matconc::stein::*;
use matconc::verify::cases::{emvti, matrix_entropy_young, operator_cs, pmvti, rect, young_commuting};
use matconc::verify::ensemble::gaussian_hermitian;
use matconc::verify::*;
use proptest::prelude::*;
use rand::Rng as _;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn pmvti_q1_holds_at_tightest_grid_point() {
    let mut r = rng::stream(21, 0);
    let (a, b, c) = (gaussian_hermitian(3, &mut r), gaussian_hermitian(3, &mut r), gaussian_hermitian(3, &mut r));
    // q = 1: |tr C(A−B)| ≤ ½ tr(s(A−B)² + C²/s), minimized at s = ‖C‖_F/‖A−B‖_F.
    let diff = &a - &b;
    let s_star = c.frobenius_norm() / diff.frobenius_norm();
    let grid: Vec<f64> = (0..81).map(|k| s_star * 2f64.powf((k as f64 - 40.0) / 20.0)).collect();
    let tightest =
        grid.iter().map(|&s| pmvti(&a, &b, &c, 1, s).unwrap()).min_by(|x, y| x.rhs.total_cmp(&y.rhs)).unwrap();
    assert!(tightest.slack >= 0.0);
    assert!(close(tightest.rhs, diff.frobenius_norm() * c.frobenius_norm(), 1e-12));
}

#[test]
fn young_matches_joint_eigenbasis_oracle() {
    let mut r = rng::stream(5, 0);
    for p in [1.1, 1.5, 2.0, 3.0] {
        let q = p / (p - 1.0);
        let (a, b) = (gaussian_hermitian(2, &mut r), gaussian_hermitian(2, &mut r));
        // L_A and R_B share the eigenbasis u_j ⊗ v_i with eigenvalues a_i, b_j.
        let mut oracle = f64::INFINITY;
        for ai in a.eigenvalues() {
            for bj in b.eigenvalues() {
                oracle = oracle.min(ai.abs().powf(p) / p + bj.abs().powf(q) / q - ai * bj);
            }
        }
        let e = young_commuting(&a, &b, p).unwrap();
        assert!(oracle >= 0.0);
        assert!((e.rhs - oracle).abs() < 1e-10, "p={p}: {} vs {oracle}", e.rhs);
    }
}

#[test]
fn operator_cs_identity_and_diagonal_cases() {
    let mut r = rng::stream(8, 0);
    let m = CMat::from_fn(3, 3, |_, _| C64::new(r.random(), r.random()));
    let n = CMat::from_fn(3, 3, |_, _| C64::new(r.random(), r.random()));
    let id = HermitianMatrix::identity(9);
    let e = operator_cs(&id, &rect(m.clone()), &rect(n.clone())).unwrap();
    let classical = m.norm() * n.norm();
    assert!(close(e.rhs, classical, 1e-12));
    // N = M: |⟨M, 𝒜M⟩| ≤ ⟨M, |𝒜| M⟩ for a Jordan-decomposed 𝒜.
    let op = gaussian_hermitian(9, &mut r);
    let e = operator_cs(&op, &rect(m.clone()), &rect(m.clone())).unwrap();
    let sa = SuperOperator::from_matrix(3, op.as_mat().clone()).unwrap();
    let (pos, neg) = (sa.map_spectrum(|x| x.max(0.0)).unwrap(), sa.map_spectrum(|x| (-x).max(0.0)).unwrap());
    let vm = CMat::from_column_slice(9, 1, m.as_slice());
    let qp = (vm.adjoint() * pos.as_mat() * &vm)[(0, 0)].re;
    let qn = (vm.adjoint() * neg.as_mat() * &vm)[(0, 0)].re;
    assert!(close(e.lhs, (qp - qn).abs(), 1e-12));
    assert!(close(e.rhs, qp + qn, 1e-12));
}

#[test]
fn scalar_entropy_young_matches_duality() {
    let u = [0.3, -1.2, 2.0];
    let w = [0.5, 2.0, 0.5];
    let lhs = u.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / 3.0;
    let rhs =
        (u.iter().map(|x: &f64| x.exp()).sum::<f64>() / 3.0).ln() + w.iter().map(|x| x * x.ln()).sum::<f64>() / 3.0;
    let hu: Vec<_> = u.iter().map(|x| HermitianMatrix::diag(&[*x])).collect();
    let hw: Vec<_> = w.iter().map(|x| HermitianMatrix::diag(&[*x])).collect();
    let e = matrix_entropy_young(&hu, &hw).unwrap();
    assert!(close(e.lhs, lhs, 1e-14) && close(e.rhs, rhs, 1e-14));
    assert!(e.slack >= 0.0);
}

#[test]
fn emvti_random_d4_over_s_values() {
    let mut r = rng::stream(13, 0);
    for _ in 0..50 {
        let (a, b, c) = (gaussian_hermitian(4, &mut r), gaussian_hermitian(4, &mut r), gaussian_hermitian(4, &mut r));
        for s in [0.25, 1.0, 4.0] {
            assert!(emvti(&a, &b, &c, s).unwrap().slack >= -1e-9);
        }
    }
}

#[test]
fn exp_efron_stein_two_cube_closed_form() {
    // X = z₁ + z₂ and V ≡ 2, so log E e^{θX} = 2 log cosh θ and log E e^{ψV} = 2ψ.
    let m = hypercube_sum(2, 1).unwrap();
    let rep = verify_exp_efron_stein(&m, &[(1.0, 4.0), (0.0, 4.0)]).unwrap();
    assert!(close(rep.rows[0].lhs, 2.0 * 1f64.cosh().ln(), 1e-13));
    assert!(close(rep.rows[0].rhs, 4.0, 1e-13));
    assert_eq!((rep.rows[1].lhs, rep.rows[1].rhs), (0.0, 0.0));
    assert!(rep.pass);
}

#[test]
fn poly_efron_stein_seeded_model() {
    let m = random_binary(3, 2, 11).unwrap();
    let rep = verify_poly_efron_stein(&m, &[1, 2, 3]).unwrap();
    assert!(rep.pass, "{rep:?}");
    let dist = ProductDistribution::iid(2, Coordinate::rademacher()).unwrap();
    let constant = MatrixModel::enumerated("const", dist, 2, |_| HermitianMatrix::identity(2)).unwrap();
    let rep = verify_poly_efron_stein(&constant, &[1, 2]).unwrap();
    assert!(rep.rows.iter().all(|r| r.lhs == 0.0 && r.rhs == 0.0));
}

#[test]
fn kernel_moment_checks() {
    let m = random_binary(1, 3, 2).unwrap();
    let e = m.enumerate(ENUMERATION_BUDGET).unwrap();
    let k = PoissonKernel::new(&e).unwrap();
    assert!(verify_kernel_poly_moments(&e, &k, &[1, 2], &default_s_grid()).unwrap().pass);

    let m = hypercube_sum(2, 1).unwrap();
    let e = m.enumerate(ENUMERATION_BUDGET).unwrap();
    let horizon = default_horizon(2, 2.0, 1e-8).unwrap();
    let est = EstimatedKernel::new(&m, &e, horizon, EstimationMethod::PathEnumeration).unwrap();
    let rep = verify_kernel_poly_moments(&e, &est, &[1, 2, 3], &default_s_grid()).unwrap();
    assert!(rep.pass && !rep.notes.is_empty(), "{rep:?}");
    let rep = verify_kernel_exp_moments(&e, &est, &[(0.5, 1.0), (-1.5, 4.0)], &default_s_grid()).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn dkw_band_covers_exact_survival() {
    // Single uniform{±1} coordinate: P(X ≥ t) is 1, ½, 0 on (−∞,−1], (−1,1], (1,∞).
    let dist = ProductDistribution::iid(1, Coordinate::rademacher()).unwrap();
    let m = MatrixModel::new(
        "coin",
        dist,
        1,
        |z: &[f64]| HermitianMatrix::diag(&[z[0]]),
        MeanSpec::Analytic(HermitianMatrix::zeros(1)),
    )
    .unwrap();
    let exact = |t: f64| {
        if t <= -1.0 {
            1.0
        } else if t <= 1.0 {
            0.5
        } else {
            0.0
        }
    };
    let grid = linear_grid(-1.5, 1.5, 0.25).unwrap();
    let mut covered = 0;
    for seed in 0..100 {
        let tail = empirical_tail(&m, Statistic::LambdaMax, 1000, &grid, seed, 0.01).unwrap();
        if tail.max_deviation(exact) <= tail.radius {
            covered += 1;
        }
    }
    assert!(covered >= 99, "covered {covered}/100");
}

#[test]
fn enumeration_agrees_with_monte_carlo() {
    let models = vec![
        hypercube_sum(4, 2).unwrap(),
        bounded_diff_demo(3, 2, 1).unwrap().0,
        compound_covariance(2, 3, HermitianMatrix::identity(3), EntryDist::Rademacher).unwrap(),
        random_binary(3, 2, 11).unwrap(),
        rectangularize(&rectangular_demo(3, 2, 3, 4).unwrap()).unwrap(),
    ];
    for m in &models {
        let e = m.enumerate(ENUMERATION_BUDGET).unwrap();
        let f = |x: &HermitianMatrix| x.square().trace();
        let exact = e.expect_scalar(|a| f(&e.x[a]));
        let mut r = rng::stream(77, 0);
        let n = 40_000;
        let draws: Vec<f64> = (0..n).map(|_| f(&m.x(&m.dist().sample(&mut r)))).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - exact).abs() <= 4.0 * se + 1e-12, "{}: {mean} vs {exact} (se {se})", m.name());
    }
}

#[test]
fn tail_comparison_on_small_hypercube() {
    let m = hypercube_sum(4, 2).unwrap();
    let grid = linear_grid(0.0, 6.0, 0.5).unwrap();
    let tail = empirical_tail(&m, Statistic::LambdaMax, 5_000, &grid, 3, 0.01).unwrap();
    let s: Vec<f64> = tail.points.iter().map(|p| p.empirical).collect();
    assert!(s.windows(2).all(|w| w[0] >= w[1]));
    let curve = BoundCurve::new(BoundKind::BoundedDiff { d: 2, sigma2: 16.0 });
    let cmp = tail.compare(&curve).unwrap();
    assert!(cmp.pass, "{:?}", cmp.domination_violations);
}

#[test]
fn rectangular_tail_matches_dilation_tail() {
    let rm = rectangular_demo(4, 2, 3, 6).unwrap();
    let m = rectangularize(&rm).unwrap();
    let grid = linear_grid(0.0, 8.0, 0.37).unwrap();
    let a = empirical_tail_rect(&rm, 2_000, &grid, 9, 0.01).unwrap();
    let b = empirical_tail(&m, Statistic::LambdaMax, 2_000, &grid, 9, 0.01).unwrap();
    assert_eq!(a.points, b.points);
}

#[test]
fn dilation_spectrum_is_signed_singular_values() {
    let mut r = rng::stream(4, 0);
    for _ in 0..100 {
        let (rows, cols) = (r.random_range(1..6), r.random_range(1..6));
        let b = RectMatrix::new(CMat::from_fn(rows, cols, |_, _| {
            C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)
        }))
        .unwrap();
        let sv = singular_values(b.as_mat());
        let mut expected: Vec<f64> = sv.iter().flat_map(|s| [*s, -*s]).collect();
        expected.extend(std::iter::repeat_n(0.0, rows.max(cols) - rows.min(cols)));
        expected.sort_by(f64::total_cmp);
        let got = dilation(&b).eigenvalues();
        for (x, y) in got.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fuzz_suites_pass_for_any_seed(seed in any::<u64>()) {
        let cfg = FuzzSettings::new(1..=4, 40, seed);
        prop_assert!(fuzz_pmvti(&cfg, 1..=7, &default_s_values()).unwrap().pass);
        prop_assert!(fuzz_emvti(&cfg, &default_s_values()).unwrap().pass);
        prop_assert!(fuzz_young_commuting(&cfg, &[1.5, 2.0, 3.0]).unwrap().pass);
        prop_assert!(fuzz_operator_cs(&cfg).unwrap().pass);
        prop_assert!(fuzz_matrix_entropy_young(&cfg, 6).unwrap().pass);
    }

    #[test]
    fn efron_stein_holds_on_random_models(seed in 0u64..100_000, n in 1usize..5, d in 1usize..5) {
        let m = random_binary(n, d, seed).unwrap();
        prop_assert!(verify_poly_efron_stein(&m, &[1, 2, 3]).unwrap().pass);
        prop_assert!(verify_exp_efron_stein(&m, &default_theta_psi()).unwrap().pass);
    }

    #[test]
    fn exponential_conjecture_holds_for_scalars(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, s in 0.01f64..100.0) {
        let h = |x: f64| HermitianMatrix::diag(&[x]);
        let e = matconc::verify::cases::conjecture(ConjectureForm::Exponential, &h(a), &h(b), &h(c), 1, s).unwrap();
        prop_assert!(e.slack >= -1e-12, "{e:?}");
    }

    #[test]
    fn normalized_slack_is_scale_aware(lhs in -1e6f64..1e6, rhs in -1e6f64..1e6) {
        let s = normalized_slack(lhs, rhs);
        prop_assert!(s.abs() <= 1.0 + 1e-12);
        prop_assert_eq!(s >= 0.0, rhs >= lhs);
    }
}
