use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::model::{sample_mean, Enumeration, MatrixModel, ENUMERATION_BUDGET};
use crate::error::{Error, Result};
use crate::matcore::HermitianMatrix;
use crate::par;
use crate::rng::{self, Rng};

/// State of both chains after a step. Step 0 is the starting pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingStep {
    pub step: usize,
    /// Refreshed coordinate (absent at step 0).
    pub j: Option<usize>,
    pub z: Vec<f64>,
    pub z_prime: Vec<f64>,
    /// `‖H(Z_(i)) − H(Z′_(i))‖`.
    pub diff_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRun {
    pub seed: u64,
    pub trajectory: Vec<CouplingStep>,
    /// First step at which the chains agree; `None` if they never did.
    pub coupling_time: Option<usize>,
    /// First step by which every coordinate has been refreshed.
    pub first_full_refresh: Option<usize>,
}

impl CouplingRun {
    /// One JSON object per step.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for s in &self.trajectory {
            serde_json::to_writer(&mut out, s)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// One coupled transition: coordinate `J` and its fresh value, shared by both chains.
fn draw_refresh(model: &MatrixModel, r: &mut Rng) -> (usize, f64) {
    let j = r.random_range(0..model.n());
    (j, model.dist().coord(j).sample(r))
}

fn check_start(model: &MatrixModel, z: &[f64], zp: &[f64]) -> Result<()> {
    if z.len() != model.n() || zp.len() != model.n() {
        return Err(Error::Shape(format!("starting points need {} coordinates", model.n())));
    }
    Ok(())
}

/// Run the coordinate-replacement coupling from `(z, z′)`: each step draws
/// one coordinate and one fresh value and applies both to the two chains.
/// The run stops after `max_steps`, or earlier once the chains have met and
/// every coordinate has been refreshed (nothing further can change).
pub fn simulate_kernel_coupling(
    model: &MatrixModel,
    z: &[f64],
    zp: &[f64],
    max_steps: usize,
    seed: u64,
) -> Result<CouplingRun> {
    check_start(model, z, zp)?;
    let n = model.n();
    let mut r = rng::stream(seed, 0);
    let (mut a, mut b) = (z.to_vec(), zp.to_vec());
    let diff = |a: &[f64], b: &[f64]| (&model.h(a) - &model.h(b)).op_norm();
    let mut trajectory =
        vec![CouplingStep { step: 0, j: None, z: a.clone(), z_prime: b.clone(), diff_norm: diff(&a, &b) }];
    let mut coupling_time = (a == b).then_some(0);
    let mut seen = vec![false; n];
    let mut unseen = n;
    let mut first_full_refresh = None;
    for step in 1..=max_steps {
        if coupling_time.is_some() && first_full_refresh.is_some() {
            break;
        }
        let (j, v) = draw_refresh(model, &mut r);
        a[j] = v;
        b[j] = v;
        if !seen[j] {
            seen[j] = true;
            unseen -= 1;
            if unseen == 0 {
                first_full_refresh = Some(step);
            }
        }
        if coupling_time.is_none() && a == b {
            coupling_time = Some(step);
        }
        trajectory.push(CouplingStep { step, j: Some(j), z: a.clone(), z_prime: b.clone(), diff_norm: diff(&a, &b) });
    }
    Ok(CouplingRun { seed, trajectory, coupling_time, first_full_refresh })
}

/// Summary of many independent coupling runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingStats {
    pub runs: usize,
    pub coupled: usize,
    pub mean: f64,
    /// Bessel-corrected standard error of the mean over coupled runs.
    pub std_error: f64,
    pub max: usize,
    /// Runs whose coupling time exceeded the first full refresh.
    pub pathwise_violations: usize,
    /// `n·H_n`, the coupon-collector expectation.
    pub coupon_collector_mean: f64,
    /// `n(1 + log n)`.
    pub coupon_collector_bound: f64,
}

impl CouplingStats {
    /// `(mean − n·H_n)/std_error`.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.coupon_collector_mean) / self.std_error
    }
}

pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Coupling and full-refresh times of one run, without recording the path.
fn coupling_times(
    model: &MatrixModel,
    z: &[f64],
    zp: &[f64],
    max_steps: usize,
    r: &mut Rng,
) -> (Option<usize>, Option<usize>) {
    let n = model.n();
    let (mut a, mut b) = (z.to_vec(), zp.to_vec());
    let mut differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    let mut coupled = (differing == 0).then_some(0);
    let mut seen = vec![false; n];
    let mut unseen = n;
    let mut full = None;
    for step in 1..=max_steps {
        if coupled.is_some() && full.is_some() {
            break;
        }
        let (j, v) = draw_refresh(model, r);
        if a[j] != b[j] {
            differing -= 1;
        }
        a[j] = v;
        b[j] = v;
        if !seen[j] {
            seen[j] = true;
            unseen -= 1;
            if unseen == 0 {
                full = Some(step);
            }
        }
        if coupled.is_none() && differing == 0 {
            coupled = Some(step);
        }
    }
    (coupled, full)
}

/// Coupling-time statistics over `runs` runs; run `k` uses stream `k` of `seed`.
pub fn coupling_stats(
    model: &MatrixModel,
    z: &[f64],
    zp: &[f64],
    runs: usize,
    max_steps: usize,
    seed: u64,
    jobs: usize,
) -> Result<CouplingStats> {
    check_start(model, z, zp)?;
    if runs < 2 {
        return Err(Error::Parameter("at least 2 runs are needed".into()));
    }
    let times = par::map_indexed(jobs, runs, |k| {
        let mut r = rng::stream(seed, k as u64);
        coupling_times(model, z, zp, max_steps, &mut r)
    })?;
    let coupled: Vec<f64> = times.iter().filter_map(|(c, _)| c.map(|c| c as f64)).collect();
    let pathwise_violations = times
        .iter()
        .filter(|(c, f)| match (c, f) {
            (Some(c), Some(f)) => c > f,
            (None, Some(_)) => true,
            _ => false,
        })
        .count();
    let m = coupled.len();
    let mean = coupled.iter().sum::<f64>() / m.max(1) as f64;
    let var = if m > 1 { coupled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0) } else { f64::NAN };
    let n = model.n();
    Ok(CouplingStats {
        runs,
        coupled: m,
        mean,
        std_error: (var / m as f64).sqrt(),
        max: times.iter().filter_map(|(c, _)| *c).max().unwrap_or(0),
        pathwise_violations,
        coupon_collector_mean: n as f64 * harmonic(n),
        coupon_collector_bound: n as f64 * (1.0 + (n as f64).ln()),
    })
}

/// Truncated kernel `Σ_{i≤I} E[H(Z_(i)) − H(Z′_(i))]` with error accounting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelEstimate {
    pub horizon: usize,
    /// Paths averaged; zero when the expectation was enumerated exactly.
    pub samples: usize,
    pub seed: u64,
    pub estimate: HermitianMatrix,
    /// Bound on the norm of the omitted terms `i > I`.
    pub truncation_error_bound: f64,
    /// Frobenius norm of per-entry standard errors (zero when enumerated).
    pub mc_std_error: f64,
}

impl KernelEstimate {
    /// Truncation bound plus `z` standard errors.
    pub fn error_radius(&self, z: f64) -> f64 {
        self.truncation_error_bound + z * self.mc_std_error
    }
}

/// `sup_z ‖H(z)‖` by enumeration; `+∞` when the space cannot be swept.
pub fn sup_norm(model: &MatrixModel) -> f64 {
    match model.enumerate(ENUMERATION_BUDGET) {
        Ok(e) => e.h.iter().map(HermitianMatrix::op_norm).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

/// `2·M·k·n·(1 − 1/n)^{I+1}`: each of the `k` differing coordinates survives
/// `i` steps unrefreshed with probability `(1 − 1/n)^i`, and every
/// uncoupled term is at most `2M`.
pub fn truncation_bound(n: usize, differing: usize, sup: f64, horizon: usize) -> f64 {
    if differing == 0 || n == 1 {
        return 0.0;
    }
    let q = 1.0 - 1.0 / n as f64;
    2.0 * sup * differing as f64 * n as f64 * q.powi(horizon as i32 + 1)
}

/// Smallest `I ≥ 1` with `n·(1 − 1/n)^{I/2}·2M < tol`.
pub fn default_horizon(n: usize, sup: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    if !sup.is_finite() {
        return Err(Error::Precondition("no finite bound on ‖H‖; supply a horizon".into()));
    }
    if n == 1 || sup == 0.0 {
        return Ok(1);
    }
    let q = 1.0 - 1.0 / n as f64;
    // n q^{I/2} 2M < tol  ⇔  I > 2 ln(tol/(2nM)) / ln q
    let x = 2.0 * (tol / (2.0 * n as f64 * sup)).ln() / q.ln();
    let mut i = (x.floor().max(0.0) as usize).max(1);
    while n as f64 * q.powf(i as f64 / 2.0) * 2.0 * sup >= tol {
        i += 1;
    }
    Ok(i)
}

/// Monte Carlo kernel with shared randomness: path `s` uses stream `s` of
/// `seed` regardless of the starting pair, so swapping `z` and `z′` negates
/// every term and the estimate is exactly antisymmetric.
pub fn estimate_kernel(
    model: &MatrixModel,
    z: &[f64],
    zp: &[f64],
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<KernelEstimate> {
    estimate_kernel_with_sup(model, z, zp, horizon, samples, seed, sup_norm(model))
}

/// As [`estimate_kernel`] with a caller-supplied bound `M ≥ sup ‖H‖`.
pub fn estimate_kernel_with_sup(
    model: &MatrixModel,
    z: &[f64],
    zp: &[f64],
    horizon: usize,
    samples: usize,
    seed: u64,
    sup: f64,
) -> Result<KernelEstimate> {
    check_start(model, z, zp)?;
    if horizon < 1 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    if samples < 2 {
        return Err(Error::Parameter("at least 2 sample paths are needed".into()));
    }
    let dim = model.dim();
    let paths: Vec<HermitianMatrix> = (0..samples)
        .map(|s| {
            let mut r = rng::stream(seed, s as u64);
            let (mut a, mut b) = (z.to_vec(), zp.to_vec());
            let mut acc = HermitianMatrix::zeros(dim);
            for i in 0..=horizon {
                if i > 0 {
                    let (j, v) = draw_refresh(model, &mut r);
                    a[j] = v;
                    b[j] = v;
                }
                if a == b {
                    break;
                }
                acc = &acc + &(&model.h(&a) - &model.h(&b));
            }
            acc
        })
        .collect();
    let (estimate, se) = sample_mean(&paths);
    let differing = z.iter().zip(zp).filter(|(x, y)| x != y).count();
    Ok(KernelEstimate {
        horizon,
        samples,
        seed,
        estimate,
        truncation_error_bound: truncation_bound(model.n(), differing, sup, horizon),
        mc_std_error: se,
    })
}

/// Truncated kernel with the coupling expectation computed exactly by
/// propagating the joint law of the two chains over outcome indices.
pub fn kernel_by_path_enumeration(e: &Enumeration, a: usize, b: usize, horizon: usize) -> KernelEstimate {
    let n = e.n();
    let mut law: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    if a != b {
        law.insert((a, b), 1.0);
    }
    let mut acc = HermitianMatrix::zeros(e.dim());
    for i in 0..=horizon {
        if i > 0 {
            let mut next = BTreeMap::new();
            for (&(x, y), &p) in &law {
                for j in 0..n {
                    for (k, &pk) in e.coord_probs(j).iter().enumerate() {
                        if pk == 0.0 {
                            continue;
                        }
                        let (x2, y2) = (e.replace(x, j, k), e.replace(y, j, k));
                        if x2 != y2 {
                            *next.entry((x2, y2)).or_insert(0.0) += p * pk / n as f64;
                        }
                    }
                }
            }
            law = next;
        }
        if law.is_empty() {
            break;
        }
        for (&(x, y), &p) in &law {
            acc = &acc + &(&e.h[x] - &e.h[y]).scaled(p);
        }
    }
    let sup = e.h.iter().map(HermitianMatrix::op_norm).fold(0.0, f64::max);
    let differing = (0..n).filter(|&j| e.digit(a, j) != e.digit(b, j)).count();
    KernelEstimate {
        horizon,
        samples: 0,
        seed: 0,
        estimate: acc,
        truncation_error_bound: truncation_bound(n, differing, sup, horizon),
        mc_std_error: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stein::builtins::hypercube_sum;

    #[test]
    fn identical_starts_couple_at_zero() {
        let m = hypercube_sum(3, 1).unwrap();
        let run = simulate_kernel_coupling(&m, &[1.0; 3], &[1.0; 3], 50, 1).unwrap();
        assert_eq!(run.coupling_time, Some(0));
        let k = estimate_kernel(&m, &[1.0; 3], &[1.0; 3], 5, 10, 1).unwrap();
        assert_eq!(k.estimate.frobenius_norm(), 0.0);
    }

    #[test]
    fn single_coordinate_couples_in_one_step() {
        let m = hypercube_sum(1, 1).unwrap();
        for seed in 0..20 {
            let run = simulate_kernel_coupling(&m, &[1.0], &[-1.0], 10, seed).unwrap();
            assert_eq!(run.coupling_time, Some(1));
        }
    }

    #[test]
    fn chains_stay_together_after_meeting() {
        let m = hypercube_sum(4, 1).unwrap();
        let run = simulate_kernel_coupling(&m, &[1.0; 4], &[-1.0; 4], 500, 8).unwrap();
        let t = run.coupling_time.unwrap();
        assert!(t <= run.first_full_refresh.unwrap());
        for s in &run.trajectory[t..] {
            assert_eq!(s.z, s.z_prime);
            assert_eq!(s.diff_norm, 0.0);
        }
        let mut buf = Vec::new();
        run.write_json_lines(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), run.trajectory.len());
    }

    #[test]
    fn horizon_rule() {
        assert_eq!(default_horizon(1, 5.0, 1e-9).unwrap(), 1);
        let i = default_horizon(4, 2.0, 1e-6).unwrap();
        let q: f64 = 0.75;
        assert!(4.0 * q.powf(i as f64 / 2.0) * 4.0 < 1e-6);
        assert!(4.0 * q.powf((i - 1) as f64 / 2.0) * 4.0 >= 1e-6);
        assert!(default_horizon(3, f64::INFINITY, 1e-3).is_err());
    }

    #[test]
    fn horizon_must_be_positive() {
        let m = hypercube_sum(2, 1).unwrap();
        assert!(matches!(estimate_kernel(&m, &[1.0, 1.0], &[-1.0, 1.0], 0, 10, 0), Err(Error::Parameter(_))));
    }
}
