//! Golden values for the closed-form bounds, shared with the acceptance suite.

use matconc::bounds::*;
use matconc::matcore::{schatten_norm, HermitianMatrix};
use matconc::rng;
use rand_distr::{Distribution, StandardNormal};

const REL: f64 = 1e-12;

fn assert_rel(got: f64, want: f64) {
    let scale = got.abs().max(want.abs());
    assert!((got - want).abs() <= REL * scale || got == want, "got {got:.17e}, want {want:.17e}");
}

pub fn chebyshev_golden() {
    assert_rel(chebyshev_tail(&[(2.0, 4.0)], 4.0).unwrap().tail.clamped, 0.25);
    let b = chebyshev_tail(&[(2.0, 4.0), (4.0, 20.0)], 2.0).unwrap();
    assert_rel(b.tail.raw, 1.0);
    assert_rel(b.tail.clamped, 1.0);
}

pub fn laplace_quadratic_mgf() {
    let quad = |th: f64| th * th / 2.0;
    let grid: Vec<f64> = (1..=300).map(|k| k as f64 / 100.0).collect();
    let b = laplace_bounds(&quad, 1, 2.0, &grid, false).unwrap();
    assert_rel(b.upper_tail.raw, (-2f64).exp());

    let b = laplace_bounds(&quad, 2, 0.0, &grid, true).unwrap();
    // minimiser of (log 2 + θ²/2)/θ is θ* = √(2 log 2), value √(2 log 2)
    let want = (2.0 * 2f64.ln()).sqrt();
    assert!((b.upper_mean - want).abs() <= REL * want, "{} vs {want}", b.upper_mean);

    let b = laplace_bounds(&|_| 0.0, 5, 0.0, &grid, true).unwrap();
    assert_eq!(b.upper_tail.raw, 5.0);
    assert_eq!(b.upper_tail.clamped, 1.0);
}

pub fn laplace_lower_side_mirrors_upper() {
    let quad = |th: f64| th * th / 2.0;
    let grid: Vec<f64> = (-300..=300).filter(|&k| k != 0).map(|k| k as f64 / 100.0).collect();
    let b = laplace_bounds(&quad, 3, -1.5, &grid, false).unwrap();
    assert_rel(b.lower_tail.raw, 3.0 * (-1.125f64).exp());
    assert!(b.lower_mean <= 0.0);
    let c = laplace_bounds(&quad, 3, 0.0, &grid, true).unwrap();
    assert!((c.lower_mean + c.upper_mean).abs() < 1e-12);
}

pub fn gaussexp_golden() {
    let p = GaussExpParams::new(2, 1.0, 0.0).unwrap();
    let b = gaussexp_bounds(&p, 2.0).unwrap();
    assert_rel(b.tail.raw, 2.0 * (-2f64).exp());
    assert_rel(b.tail.raw, 0.270_670_566_473_225_4);
    assert_rel(b.mean_bound, (2.0 * 2f64.ln()).sqrt());
    assert_rel(b.mean_bound, 1.177_410_022_515_474_6);
    let p = GaussExpParams::new(1, 1.0, 1.0).unwrap();
    assert_eq!(gaussexp_bounds(&p, 0.0).unwrap().mean_bound, 0.0);
    let p = GaussExpParams::new(3, 0.0, 0.0).unwrap();
    assert_eq!(gaussexp_bounds(&p, 1.0).unwrap().tail.raw, 0.0);
    assert_eq!(gaussexp_bounds(&p, 0.0).unwrap().tail.raw, 3.0);
}

pub fn efron_stein_rhs_golden() {
    assert_rel(efron_stein_poly_rhs(1, 1.0).unwrap(), 2f64.sqrt());
    assert_eq!(efron_stein_poly_rhs(1, 0.0).unwrap(), 0.0);
    assert_rel(efron_stein_poly_rhs(3, 1.0).unwrap(), 10f64.sqrt());

    assert_eq!(efron_stein_exp_rhs(0.0, 3.0, 7.0).unwrap(), 0.0);
    assert_rel(efron_stein_exp_rhs(1.0, 4.0, 1.0).unwrap(), 0.5);
    // θ²/ψ = 0.49
    let theta = (0.49f64 * 4.0).sqrt();
    assert!((efron_stein_exp_rhs(theta, 4.0, 1.0).unwrap() - 24.5).abs() < 1e-12 * 24.5);
    let near = 2f64.sqrt() - 1e-9;
    assert!(efron_stein_exp_rhs(near, 4.0, 1.0).unwrap() > 1e8);
}

pub fn self_bounded_golden() {
    assert_rel(self_bounded_bounds(2, 1.0, 0.0, 2.0).unwrap().tail.raw, 2.0 * (-1f64).exp());
    assert_rel(self_bounded_bounds(2, 1.0, 0.0, 2.0).unwrap().tail.raw, 0.735_758_882_342_884_6);
    assert_eq!(self_bounded_bounds(1, 3.0, 2.0, 0.0).unwrap().mean_bound, 0.0);
    assert_rel(self_bounded_bounds(2, 0.0, 1.0, 6.0).unwrap().tail.raw, 2.0 * (-1f64).exp());
}

pub fn bounded_diff_golden() {
    let ids = vec![HermitianMatrix::identity(3); 4];
    assert_rel(bounded_diff_sigma(&ids).unwrap(), 4.0);
    let pair = [HermitianMatrix::diag(&[1.0, 0.0]), HermitianMatrix::diag(&[0.0, 2.0])];
    assert_rel(bounded_diff_sigma(&pair).unwrap(), 4.0);

    let mut r = rng::stream(5, 0);
    let list: Vec<HermitianMatrix> = (0..4)
        .map(|_| {
            let re: Vec<f64> = (0..9).map(|_| StandardNormal.sample(&mut r)).collect();
            let im: Vec<f64> = (0..9).map(|_| StandardNormal.sample(&mut r)).collect();
            let m =
                matconc::matcore::CMat::from_fn(3, 3, |i, j| matconc::matcore::C64::new(re[3 * i + j], im[3 * i + j]));
            HermitianMatrix::project(m)
        })
        .collect();
    let sum = list.iter().fold(HermitianMatrix::zeros(3), |acc, a| &acc + &(a.square()));
    assert_rel(bounded_diff_sigma(&list).unwrap(), schatten_norm(&sum, f64::INFINITY).unwrap());
    let spec = BoundedDiffSpec::new(list.clone()).unwrap();
    assert_rel(spec.sigma2, bounded_diff_sigma(&list).unwrap());

    let b = bounded_diff_bounds(2, 1.0, 2.0).unwrap();
    assert_rel(b.tail.raw, 0.270_670_566_473_225_4);
    assert_eq!(bounded_diff_bounds(1, 1.0, 0.0).unwrap().mean_bound, 0.0);
    let b = bounded_diff_bounds(4, 2.0, 0.0).unwrap();
    assert_eq!((b.tail.raw, b.tail.clamped), (4.0, 1.0));
}

pub fn dobrushin_golden() {
    let zero = DobrushinSpec::new(vec![vec![0.0; 2]; 2], 1.0).unwrap();
    assert_eq!(zero.b, 1.0);
    assert_rel(dobrushin_bounds(&zero, 2, 2.0).unwrap().tail.raw, 2.0 * (-4f64).exp());
    let half = DobrushinSpec::new(vec![vec![0.0, 0.5], vec![0.5, 0.0]], 1.0).unwrap();
    assert_rel(half.b, 2.0);
    let err = DobrushinSpec::new(vec![vec![0.0, 1.2], vec![0.0, 0.0]], 1.0).unwrap_err();
    assert!(err.to_string().contains('D'), "{err}");
}

pub fn compound_cov_golden() {
    let spec = CompoundCovSpec::new(2, 2, 1.0, 1.0, HermitianMatrix::identity(2)).unwrap();
    let b = compound_cov_bounds(&spec, 10.0).unwrap();
    let denom = 44.0 * 3.0 * 2.0 + 64.0 * 3f64.sqrt() * 10.0;
    assert!((denom - 1372.5).abs() < 0.1);
    assert_rel(b.tail.raw, 4.0 * (-100.0 / denom).exp());
    assert!((b.tail.raw - 3.719).abs() < 1e-3);
    assert_eq!(b.tail.clamped, 1.0);

    let zero_b = CompoundCovSpec::new(3, 2, 1.0, 1.0, HermitianMatrix::zeros(2)).unwrap();
    assert_eq!(compound_cov_bounds(&zero_b, 1.0).unwrap().tail.raw, 0.0);
    let p1 = CompoundCovSpec::new(1, 2, 0.5, 1.0, HermitianMatrix::identity(2)).unwrap();
    assert_eq!(compound_cov_bounds(&p1, 1.0).unwrap().mean_bound, 0.0);

    let p2 = CompoundCovSpec::new(5, 2, 1.0, 1.0, HermitianMatrix::identity(2)).unwrap();
    let lp = 5f64.ln();
    let want = 2.0 * (44.0 * 6.0 * lp * 2.0).sqrt() + 32.0 * 3f64.sqrt() * 5.0 * lp;
    assert_rel(compound_cov_bounds(&p2, 0.0).unwrap().mean_bound, want);
}

pub fn compound_cov_general_magnitude_rescales() {
    // With entries bounded by L, Z = L·Z₀ and ZBZ* = Z₀(L²B)Z₀*.
    let b = HermitianMatrix::from_real_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let l = 3.0;
    let spec = CompoundCovSpec::new(4, 2, 4.0, l, b.clone()).unwrap();
    let unit = CompoundCovSpec::new(4, 2, 4.0 / 9.0, 1.0, b.scaled(l * l)).unwrap();
    for t in [0.0, 1.0, 10.0, 250.0] {
        assert_rel(compound_cov_bounds(&spec, t).unwrap().tail.raw, compound_cov_bounds(&unit, t).unwrap().tail.raw);
    }
    assert!(CompoundCovSpec::new(2, 2, 2.0, 1.0, HermitianMatrix::identity(2)).is_err());
}

pub fn compound_psd_mgf_golden() {
    assert_eq!(compound_psd_mgf(&HermitianMatrix::identity(2), 2, 1.0, 0.0).unwrap(), 0.0);
    // 8θ²·tr A·(pσ²‖A‖ + max a_jj)/(1 − 24p‖A‖θ) with θ = 0.01: 24·2·1·0.01 = 0.48
    let want = 8.0 * 1e-4 * 2.0 * 3.0 / (1.0 - 0.48);
    assert_rel(compound_psd_mgf(&HermitianMatrix::identity(2), 2, 1.0, 0.01).unwrap(), want);
    assert_eq!(compound_psd_mgf(&HermitianMatrix::zeros(3), 2, 1.0, 0.3).unwrap(), 0.0);
}

pub fn haar_golden() {
    let s = 3.0;
    let mut tv = vec![0.0; 6];
    tv[0] = 1.0;
    let spec = HaarSpec::new(s / 4.0, s, tv, 2).unwrap();
    assert_rel(spec.sigma2(), s * s / 2.0);
    let spec = HaarSpec::new(1.0, s, vec![0.0; 4], 2).unwrap();
    assert_eq!(spec.sigma2(), 0.0);
    assert_eq!(haar_bounds(&spec, 1.0).unwrap().tail.raw, 0.0);

    let tv: Vec<f64> = (0..10).map(|i| 2f64.powi(-i)).collect();
    let spec = HaarSpec::new(s / 4.0, s, tv, 2).unwrap();
    let partial: f64 = (0..10).map(|i| 2f64.powi(-i)).sum();
    assert_rel(spec.sigma2(), s * s / 2.0 * partial);
    assert!((partial - 1.998).abs() < 1e-3);
    let b = haar_bounds(&spec, 2.0).unwrap();
    assert_rel(b.tail.raw, 2.0 * (-4.0 / (2.0 * spec.sigma2())).exp());
}

pub fn curves_serialize_round_trip() {
    let spec = DobrushinSpec::new(vec![vec![0.0, 0.25], vec![0.5, 0.0]], 2.0).unwrap();
    let curve = BoundCurve::new(BoundKind::Dobrushin { d: 3, spec });
    let json = serde_json::to_string(&curve).unwrap();
    let back: BoundCurve = serde_json::from_str(&json).unwrap();
    assert_eq!(back, curve);
    let bad = json.replace("0.5", "1.5");
    assert!(serde_json::from_str::<BoundCurve>(&bad).is_err());
}

/// Seeded sweep of `(B, t) ↦ (αB, αt)` invariance of the compound covariance tail.
pub fn compound_cov_homogeneity_sweep() {
    use rand::Rng as _;
    let mut r = rng::stream(77, 0);
    for _ in 0..2_000 {
        let p = r.random_range(1..6);
        let n = r.random_range(1..4);
        let alpha = 10f64.powf(r.random_range(-2.0..2.0));
        let t = r.random_range(0.0..100.0);
        let m =
            matconc::matcore::CMat::from_fn(n, n, |_, _| matconc::matcore::C64::new(r.random_range(-3.0..3.0), 0.0));
        let b = HermitianMatrix::project(m);
        let s = CompoundCovSpec::new(p, n, 0.7, 1.0, b.clone()).unwrap();
        let sa = CompoundCovSpec::new(p, n, 0.7, 1.0, b.scaled(alpha)).unwrap();
        let x = compound_cov_bounds(&s, t).unwrap().tail.raw;
        let y = compound_cov_bounds(&sa, alpha * t).unwrap().tail.raw;
        assert!((x - y).abs() <= REL * x.max(y).max(1e-300), "{x} vs {y}");
    }
}

/// Every golden check, for suites that report them individually.
#[allow(dead_code)]
pub const GOLDEN: &[(&str, fn())] = &[
    ("chebyshev_golden", chebyshev_golden),
    ("laplace_quadratic_mgf", laplace_quadratic_mgf),
    ("laplace_lower_side_mirrors_upper", laplace_lower_side_mirrors_upper),
    ("gaussexp_golden", gaussexp_golden),
    ("efron_stein_rhs_golden", efron_stein_rhs_golden),
    ("self_bounded_golden", self_bounded_golden),
    ("bounded_diff_golden", bounded_diff_golden),
    ("dobrushin_golden", dobrushin_golden),
    ("compound_cov_golden", compound_cov_golden),
    ("compound_cov_general_magnitude_rescales", compound_cov_general_magnitude_rescales),
    ("compound_psd_mgf_golden", compound_psd_mgf_golden),
    ("haar_golden", haar_golden),
    ("curves_serialize_round_trip", curves_serialize_round_trip),
    ("compound_cov_homogeneity_sweep", compound_cov_homogeneity_sweep),
];
