use matconc::matcore::{psd_gap, HermitianMatrix, ScalarFn};
use matconc::stein::*;
use proptest::prelude::*;

fn enumerate(m: &MatrixModel) -> Enumeration {
    m.enumerate(ENUMERATION_BUDGET).unwrap()
}

/// `Σ_{i<terms} P^i X` with `P` applied through the pair's transitions.
fn power_series_potential(e: &Enumeration, terms: usize) -> Vec<HermitianMatrix> {
    let mut term = e.x.clone();
    let mut acc = e.x.clone();
    for _ in 1..terms {
        term = (0..e.len())
            .map(|a| {
                e.transitions(a).into_iter().fold(HermitianMatrix::zeros(e.dim()), |s, (b, w)| &s + &term[b].scaled(w))
            })
            .collect();
        for (x, t) in acc.iter_mut().zip(&term) {
            *x = &*x + t;
        }
    }
    acc
}

#[test]
fn poisson_kernel_matches_power_series() {
    for seed in 0..4 {
        let m = random_binary(3, 2, seed).unwrap();
        let e = enumerate(&m);
        let k = PoissonKernel::new(&e).unwrap();
        // spectral gap of P on centred functions is 1/n, so 600 terms leave (2/3)^600
        let series = power_series_potential(&e, 600);
        for (a, (g, want)) in k.potential().iter().zip(&series).enumerate() {
            let err = (g - want).frobenius_norm();
            assert!(err < 1e-10 * (1.0 + want.frobenius_norm()), "seed {seed}, outcome {a}: {err}");
        }
    }
}

#[test]
fn exact_kernels_satisfy_identities() {
    let models = vec![hypercube_sum(1, 1).unwrap(), hypercube_sum(3, 2).unwrap(), random_binary(4, 3, 7).unwrap()];
    for m in &models {
        let e = enumerate(m);
        let k = PoissonKernel::new(&e).unwrap();
        let r = check_stein_identity(&e, &k);
        assert!(r.residual <= 1e-10 && r.radius == 0.0, "{}: {}", m.name(), r.residual);
        assert_eq!(kernel_antisymmetry_defect(&e, &k), 0.0);
        assert!(kernel_centering(&e, &k) <= 1e-10);
        let cube = ScalarFn::cube();
        for f in [ScalarFn::everywhere("one", |_| 1.0), ScalarFn::everywhere("id", |x| x), cube] {
            let res = exchangeable_pairs_identity(&e, &k, &f).unwrap();
            assert!(res <= 1e-10, "{} with F={}: {res}", m.name(), f.name());
        }
    }
}

#[test]
fn single_coordinate_kernel_is_the_difference() {
    let m = random_binary(1, 2, 3).unwrap();
    let e = enumerate(&m);
    let k = PoissonKernel::new(&e).unwrap();
    for a in 0..2 {
        for b in 0..2 {
            assert!((&k.eval(a, b) - &(&e.h[a] - &e.h[b])).frobenius_norm() < 1e-14);
        }
    }
    let path = EstimatedKernel::new(&m, &e, 3, EstimationMethod::PathEnumeration).unwrap();
    assert!((&path.eval(0, 1) - &(&e.h[0] - &e.h[1])).frobenius_norm() < 1e-15);
}

#[test]
fn matrix_stein_pair_on_additive_model() {
    let m = hypercube_sum(4, 2).unwrap();
    let e = enumerate(&m);
    let k = MatrixSteinKernel::additive(&e);
    assert!(check_stein_identity(&e, &k).residual <= 1e-10);
    let p = PoissonKernel::new(&e).unwrap();
    for a in 0..e.len() {
        for (b, _) in e.transitions(a) {
            assert!((&k.eval(a, b) - &p.eval(a, b)).frobenius_norm() < 1e-12);
        }
    }
}

#[test]
fn variance_proxy_identity_and_bound() {
    for m in [hypercube_sum(3, 1).unwrap(), random_binary(3, 2, 1).unwrap(), random_binary(4, 3, 2).unwrap()] {
        let e = enumerate(&m);
        let n = e.n() as f64;
        let k = PoissonKernel::new(&e).unwrap();
        let mut half_sum = HermitianMatrix::zeros(e.dim());
        for a in 0..e.len() {
            let v = variance_proxy(&m, &e.values[a]).unwrap();
            assert!(v.lambda_min() >= -1e-10);
            let g = gamma0(&e, a);
            assert!((&v - &g.scaled(n / 2.0)).frobenius_norm() <= 1e-10 * (1.0 + v.frobenius_norm()));
            let c = conditional_variances(&e, &k, a);
            assert!((&v - &c.v_x.scaled(n)).frobenius_norm() <= 1e-10 * (1.0 + v.frobenius_norm()));
            assert!(c.v_x.lambda_min() >= -1e-10 && c.v_k.lambda_min() >= -1e-10);
            half_sum = &half_sum + &(&c.v_x + &c.v_k).scaled(0.5 * e.probs[a]);
        }
        let var = e.expect(|a| e.x[a].square());
        assert!(psd_gap(&var, &half_sum).unwrap() >= -1e-9, "{}", m.name());
    }
}

#[test]
fn estimated_kernel_is_exactly_antisymmetric() {
    let m = random_binary(3, 2, 5).unwrap();
    let e = enumerate(&m);
    for (a, b) in [(0, 7), (1, 2), (3, 5)] {
        let k_ab = estimate_kernel(&m, &e.values[a], &e.values[b], 12, 64, 99).unwrap();
        let k_ba = estimate_kernel(&m, &e.values[b], &e.values[a], 12, 64, 99).unwrap();
        assert_eq!((&k_ab.estimate + &k_ba.estimate).frobenius_norm(), 0.0);
    }
    let mc = EstimatedKernel::new(&m, &e, 12, EstimationMethod::MonteCarlo { samples: 32, seed: 4 }).unwrap();
    assert_eq!(kernel_antisymmetry_defect(&e, &mc), 0.0);
}

#[test]
fn path_enumeration_converges_to_poisson_kernel() {
    let m = random_binary(3, 2, 9).unwrap();
    let e = enumerate(&m);
    let sup = e.h.iter().map(HermitianMatrix::op_norm).fold(0.0, f64::max);
    let horizon = default_horizon(3, sup, 1e-8).unwrap();
    let est = EstimatedKernel::new(&m, &e, horizon, EstimationMethod::PathEnumeration).unwrap();
    let exact = PoissonKernel::new(&e).unwrap();
    assert!(est.error_bound() < 1e-6);
    for a in 0..e.len() {
        for (b, _) in e.transitions(a) {
            let err = (&est.eval(a, b) - &exact.eval(a, b)).op_norm();
            let bound = est.estimate(a, b).unwrap().truncation_error_bound;
            assert!(err <= bound + 1e-12, "({a},{b}): {err} > {bound}");
        }
    }
}

#[test]
fn monte_carlo_kernel_reproduces_x_on_two_cube() {
    let m = hypercube_sum(2, 1).unwrap();
    let e = enumerate(&m);
    let horizon = default_horizon(2, 2.0, 1e-6).unwrap();
    let k = EstimatedKernel::new(&m, &e, horizon, EstimationMethod::MonteCarlo { samples: 20_000, seed: 1 }).unwrap();
    let r = check_stein_identity(&e, &k);
    assert!(r.residual <= r.radius, "{} > {}", r.residual, r.radius);
}

#[test]
fn coupling_mean_matches_coupon_collector_for_small_cube() {
    let m = hypercube_sum(3, 1).unwrap();
    let s = coupling_stats(&m, &[1.0; 3], &[-1.0; 3], 20_000, 10_000, 17, 1).unwrap();
    assert_eq!(s.coupled, 20_000);
    assert_eq!(s.pathwise_violations, 0);
    assert!((s.coupon_collector_mean - 5.5).abs() < 1e-12);
    assert!(s.z_score().abs() < 3.0, "z = {}", s.z_score());
    let par = coupling_stats(&m, &[1.0; 3], &[-1.0; 3], 20_000, 10_000, 17, 3).unwrap();
    assert_eq!(s, par);
}

#[test]
fn exchangeable_pair_sampler_matches_joint_pmf() {
    let m = random_binary(2, 1, 3).unwrap();
    let e = enumerate(&m);
    let pmf = joint_pmf(&e);
    let mut sampler = make_exchangeable_pair(&m, 8);
    let trials = 200_000;
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..trials {
        let d = sampler.sample();
        let key = (e.locate(&d.z).unwrap(), e.locate(&d.z_prime).unwrap());
        *counts.entry(key).or_insert(0usize) += 1;
    }
    for (key, p) in pmf {
        let f = *counts.get(&key).unwrap_or(&0) as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((f - p).abs() < 5.0 * se, "{key:?}: {f} vs {p}");
    }
}

#[test]
fn rectangular_dilation_norm_matches_singular_value() {
    let rm = rectangular_demo(3, 2, 3, 4).unwrap();
    let m = rectangularize(&rm).unwrap();
    for z in [[1.0, -1.0, 1.0], [-1.0, -1.0, 1.0]] {
        let b = (rm.h)(&z);
        let s = matconc::matcore::singular_values(b.as_mat());
        assert!((m.x(&z).lambda_max() - s[0]).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_models_satisfy_kernel_invariants(seed in 0u64..10_000, n in 1usize..5, d in 1usize..4) {
        let m = random_binary(n, d, seed).unwrap();
        let e = enumerate(&m);
        prop_assert!(e.expect(|a| e.x[a].clone()).op_norm() <= 1e-10);
        prop_assert!(exchangeability_defect(&e) <= 1e-16);
        let k = PoissonKernel::new(&e).unwrap();
        prop_assert!(check_stein_identity(&e, &k).residual <= 1e-10);
        prop_assert!(kernel_centering(&e, &k) <= 1e-10);
        prop_assert_eq!(kernel_antisymmetry_defect(&e, &k), 0.0);
    }
}
