//! Randomized suites for the trace and operator inequalities.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::cases::{rect, CaseInputs, ConjectureForm, Evaluation};
use super::ensemble::{random_psd, Ensemble, EnsembleKind};
use crate::error::{Error, Result};
use crate::matcore::{CMat, HermitianMatrix, C64};
use crate::par;
use crate::rng::{self, Rng};

/// Pass threshold on normalized slack.
pub const FUZZ_TOL: f64 = 1e-9;
/// Number of lowest-slack cases kept in a report.
pub const NEAR_VIOLATIONS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub trial: usize,
    pub ensemble: EnsembleKind,
    pub inputs: CaseInputs,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimSlack {
    pub d: usize,
    pub trials: usize,
    pub min_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub inequality: String,
    pub trials: usize,
    pub dim_range: (usize, usize),
    pub seed: u64,
    pub tolerance: f64,
    pub min_slack: f64,
    pub pass: bool,
    pub worst_case: Option<WorstCase>,
    pub by_dim: Vec<DimSlack>,
    pub near_violations: Vec<WorstCase>,
}

/// Shared settings of every suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzSettings {
    pub dims: (usize, usize),
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn default_jobs() -> usize {
    1
}

fn default_tol() -> f64 {
    FUZZ_TOL
}

impl FuzzSettings {
    pub fn new(dims: RangeInclusive<usize>, trials: usize, seed: u64) -> Self {
        Self {
            dims: (*dims.start(), *dims.end()),
            trials,
            seed,
            jobs: 1,
            ensemble: Ensemble::default(),
            tolerance: FUZZ_TOL,
        }
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.dims;
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be positive".into()));
        }
        if lo == 0 || lo > hi || hi > 16 {
            return Err(Error::Parameter(format!("dimension range {lo}..={hi} must satisfy 1 ≤ lo ≤ hi ≤ 16")));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Parameter("tolerance must be a finite nonnegative number".into()));
        }
        let e = &self.ensemble;
        if e.gaussian + e.near_commuting + e.rank_one + e.spectrum_gapped == 0 {
            return Err(Error::Parameter("ensemble weights are all zero".into()));
        }
        Ok(())
    }
}

struct Trial {
    d: usize,
    case: WorstCase,
}

fn pick_dim(r: &mut Rng, (lo, hi): (usize, usize)) -> usize {
    r.random_range(lo..=hi)
}

fn evaluate_best_of(trial: usize, kind: EnsembleKind, cases: Vec<CaseInputs>) -> Result<WorstCase> {
    let mut worst: Option<(CaseInputs, Evaluation)> = None;
    for c in cases {
        let e = c.evaluate()?;
        if worst.as_ref().is_none_or(|(_, w)| e.slack < w.slack) {
            worst = Some((c, e));
        }
    }
    let (inputs, e) = worst.ok_or_else(|| Error::Parameter("no parameter values to test".into()))?;
    Ok(WorstCase { trial, ensemble: kind, inputs, lhs: e.lhs, rhs: e.rhs, slack: e.slack })
}

/// Run `trials` independent trials and reduce in trial order.
fn run_suite<F>(name: &str, cfg: &FuzzSettings, trial: F) -> Result<FuzzReport>
where
    F: Fn(usize, &mut Rng) -> Result<Trial> + Sync + Send,
{
    cfg.validate()?;
    let seed = cfg.seed;
    let results = par::map_indexed(cfg.jobs, cfg.trials, |t| {
        let mut r = rng::stream(seed, t as u64);
        trial(t, &mut r)
    })?;
    let mut trials = Vec::with_capacity(results.len());
    for r in results {
        trials.push(r?);
    }
    Ok(reduce(name, cfg, trials))
}

fn reduce(name: &str, cfg: &FuzzSettings, trials: Vec<Trial>) -> FuzzReport {
    let mut by_dim: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for t in &trials {
        let e = by_dim.entry(t.d).or_insert((0, f64::INFINITY));
        e.0 += 1;
        e.1 = e.1.min(t.case.slack);
    }
    let mut order: Vec<&Trial> = trials.iter().collect();
    // Stable sort keeps trial order on ties.
    order.sort_by(|a, b| a.case.slack.total_cmp(&b.case.slack));
    let near: Vec<WorstCase> = order.iter().take(NEAR_VIOLATIONS).map(|t| t.case.clone()).collect();
    let worst = near.first().cloned();
    let min_slack = worst.as_ref().map_or(f64::INFINITY, |w| w.slack);
    FuzzReport {
        inequality: name.to_string(),
        trials: trials.len(),
        dim_range: cfg.dims,
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        min_slack,
        pass: min_slack >= -cfg.tolerance,
        worst_case: worst,
        by_dim: by_dim.into_iter().map(|(d, (trials, min_slack))| DimSlack { d, trials, min_slack }).collect(),
        near_violations: near,
    }
}

fn triple(
    cfg: &FuzzSettings,
    d: usize,
    r: &mut Rng,
) -> (EnsembleKind, HermitianMatrix, HermitianMatrix, HermitianMatrix) {
    let (kind, mut m) = cfg.ensemble.sample(d, 3, r);
    // One trial in ten probes the A = B diagonal.
    if r.random_bool(0.1) {
        m[1] = m[0].clone();
    }
    let c = m.pop().unwrap();
    let b = m.pop().unwrap();
    let a = m.pop().unwrap();
    (kind, a, b, c)
}

fn check_s_values(s_values: &[f64]) -> Result<()> {
    if s_values.is_empty() || s_values.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Parameter("s values must be a nonempty list of positive numbers".into()));
    }
    Ok(())
}

fn check_q_range(q: &RangeInclusive<u32>) -> Result<()> {
    if *q.start() == 0 || q.start() > q.end() || *q.end() > 64 {
        return Err(Error::Parameter(format!("q range {}..={} must lie in 1..=64", q.start(), q.end())));
    }
    Ok(())
}

/// Polynomial mean value trace inequality; every trial draws `q` from
/// `q_range` and keeps the worst `s` in `s_values`.
pub fn fuzz_pmvti(cfg: &FuzzSettings, q_range: RangeInclusive<u32>, s_values: &[f64]) -> Result<FuzzReport> {
    check_q_range(&q_range)?;
    check_s_values(s_values)?;
    run_suite("pmvti", cfg, |t, r| {
        let d = pick_dim(r, cfg.dims);
        let q = r.random_range(q_range.clone());
        let (kind, a, b, c) = triple(cfg, d, r);
        let cases =
            s_values.iter().map(|&s| CaseInputs::Pmvti { a: a.clone(), b: b.clone(), c: c.clone(), q, s }).collect();
        Ok(Trial { d, case: evaluate_best_of(t, kind, cases)? })
    })
}

pub fn fuzz_emvti(cfg: &FuzzSettings, s_values: &[f64]) -> Result<FuzzReport> {
    check_s_values(s_values)?;
    run_suite("emvti", cfg, |t, r| {
        let d = pick_dim(r, cfg.dims);
        let (kind, a, b, c) = triple(cfg, d, r);
        let cases =
            s_values.iter().map(|&s| CaseInputs::Emvti { a: a.clone(), b: b.clone(), c: c.clone(), s }).collect();
        Ok(Trial { d, case: evaluate_best_of(t, kind, cases)? })
    })
}

pub fn fuzz_young_commuting(cfg: &FuzzSettings, p_values: &[f64]) -> Result<FuzzReport> {
    if p_values.is_empty() || p_values.iter().any(|p| !(*p > 1.0 && p.is_finite())) {
        return Err(Error::Parameter("Young exponents must be a nonempty list in (1, ∞)".into()));
    }
    run_suite("young_commuting", cfg, |t, r| {
        let d = pick_dim(r, cfg.dims);
        let (kind, mut m) = cfg.ensemble.sample(d, 2, r);
        let b = m.pop().unwrap();
        let a = m.pop().unwrap();
        let cases = p_values.iter().map(|&p| CaseInputs::YoungCommuting { a: a.clone(), b: b.clone(), p }).collect();
        Ok(Trial { d, case: evaluate_best_of(t, kind, cases)? })
    })
}

fn complex_matrix(d: usize, r: &mut Rng) -> CMat {
    CMat::from_fn(d, d, |_, _| C64::new(StandardNormal.sample(r), StandardNormal.sample(r)))
}

/// Operator Cauchy–Schwarz with a random self-adjoint superoperator drawn
/// from the ensemble at dimension `d²`. One trial in ten sets `N = M`.
pub fn fuzz_operator_cs(cfg: &FuzzSettings) -> Result<FuzzReport> {
    run_suite("operator_cs", cfg, |t, r| {
        let d = pick_dim(r, cfg.dims);
        let (kind, mut ops) = cfg.ensemble.sample(d * d, 1, r);
        let op = ops.pop().unwrap();
        let m = complex_matrix(d, r);
        let n = if r.random_bool(0.1) { m.clone() } else { complex_matrix(d, r) };
        let case = CaseInputs::OperatorCs { op, m: rect(m), n: rect(n) };
        Ok(Trial { d, case: evaluate_best_of(t, kind, vec![case])? })
    })
}

/// Entropy duality over a finite ensemble of `ensemble_size` pairs `(U, W)`
/// with `W` random PSD, normalized so that `E tr̄ W = 1`.
pub fn fuzz_matrix_entropy_young(cfg: &FuzzSettings, ensemble_size: usize) -> Result<FuzzReport> {
    if ensemble_size == 0 {
        return Err(Error::Parameter("ensemble size must be positive".into()));
    }
    run_suite("matrix_entropy_young", cfg, |t, r| {
        let d = pick_dim(r, cfg.dims);
        let (kind, u) = cfg.ensemble.sample(d, ensemble_size, r);
        let w: Vec<HermitianMatrix> = (0..ensemble_size).map(|_| random_psd(d, r)).collect();
        let mean = w.iter().map(HermitianMatrix::ntrace).sum::<f64>() / ensemble_size as f64;
        let w = w.iter().map(|x| x.scaled(1.0 / mean)).collect();
        let case = CaseInputs::MatrixEntropyYoung { u, w };
        Ok(Trial { d, case: evaluate_best_of(t, kind, vec![case])? })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub trials: usize,
    pub dim_range: (usize, usize),
    pub q_range: (u32, u32),
    pub s_values: Vec<f64>,
    pub seed: u64,
    pub forms: Vec<FuzzReport>,
}

impl ConjectureReport {
    pub fn form(&self, f: ConjectureForm) -> Option<&FuzzReport> {
        let name = match f {
            ConjectureForm::Exponential => "conjecture_exponential",
            ConjectureForm::Polynomial => "conjecture_polynomial",
        };
        self.forms.iter().find(|r| r.inequality == name)
    }

    /// Smallest slack over both forms at dimension `d`.
    pub fn min_slack_at(&self, d: usize) -> Option<f64> {
        self.forms.iter().flat_map(|r| r.by_dim.iter().filter(|s| s.d == d).map(|s| s.min_slack)).reduce(f64::min)
    }
}

/// Both signed forms on the same random triples. Never fails on negative
/// slack; the report carries the witnesses.
pub fn explore_conjecture(
    cfg: &FuzzSettings,
    q_range: RangeInclusive<u32>,
    s_values: &[f64],
) -> Result<ConjectureReport> {
    check_q_range(&q_range)?;
    check_s_values(s_values)?;
    cfg.validate()?;
    let seed = cfg.seed;
    let results = par::map_indexed(cfg.jobs, cfg.trials, |t| -> Result<(Trial, Trial)> {
        let mut r = rng::stream(seed, t as u64);
        let d = pick_dim(&mut r, cfg.dims);
        let q = r.random_range(q_range.clone());
        let (kind, a, b, c) = triple(cfg, d, &mut r);
        let mk = |form| -> Result<Trial> {
            let cases = s_values
                .iter()
                .map(|&s| CaseInputs::Conjecture { form, a: a.clone(), b: b.clone(), c: c.clone(), q, s })
                .collect();
            Ok(Trial { d, case: evaluate_best_of(t, kind, cases)? })
        };
        Ok((mk(ConjectureForm::Exponential)?, mk(ConjectureForm::Polynomial)?))
    })?;
    let (mut exp, mut poly) = (Vec::new(), Vec::new());
    for r in results {
        let (e, p) = r?;
        exp.push(e);
        poly.push(p);
    }
    Ok(ConjectureReport {
        trials: cfg.trials,
        dim_range: cfg.dims,
        q_range: (*q_range.start(), *q_range.end()),
        s_values: s_values.to_vec(),
        seed,
        forms: vec![reduce("conjecture_exponential", cfg, exp), reduce("conjecture_polynomial", cfg, poly)],
    })
}

/// Result of re-evaluating a serialized case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// Whether the recomputed slack equals the recorded one bit for bit.
    pub reproduced: bool,
}

pub fn replay(case: &WorstCase) -> Result<ReplayOutcome> {
    let e = case.inputs.evaluate()?;
    Ok(ReplayOutcome {
        inequality: case.inputs.inequality().to_string(),
        lhs: e.lhs,
        rhs: e.rhs,
        slack: e.slack,
        reproduced: e.slack.to_bits() == case.slack.to_bits(),
    })
}

/// Default `s` values for the mean value suites.
pub fn default_s_values() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass_and_are_jobs_invariant() {
        let cfg = FuzzSettings::new(1..=3, 200, 5);
        let a = fuzz_pmvti(&cfg, 1..=4, &default_s_values()).unwrap();
        let b = fuzz_pmvti(&cfg.clone().jobs(3), 1..=4, &default_s_values()).unwrap();
        assert!(a.pass, "{}", a.min_slack);
        assert_eq!(a, b);
        assert_eq!(a.by_dim.iter().map(|x| x.trials).sum::<usize>(), 200);
        assert!(fuzz_emvti(&cfg, &[0.5, 2.0]).unwrap().pass);
        assert!(fuzz_young_commuting(&cfg, &[1.1, 2.0]).unwrap().pass);
        assert!(fuzz_operator_cs(&cfg).unwrap().pass);
        assert!(fuzz_matrix_entropy_young(&cfg, 4).unwrap().pass);
    }

    #[test]
    fn zero_trials_is_a_parameter_error() {
        let cfg = FuzzSettings::new(1..=2, 0, 1);
        assert!(matches!(fuzz_emvti(&cfg, &[1.0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn worst_case_replays() {
        let cfg = FuzzSettings::new(2..=3, 50, 9);
        let rep = fuzz_emvti(&cfg, &[1.0]).unwrap();
        let w = rep.worst_case.unwrap();
        let json = serde_json::to_string(&w).unwrap();
        let back: WorstCase = serde_json::from_str(&json).unwrap();
        assert!(replay(&back).unwrap().reproduced);
    }

    #[test]
    fn conjecture_report_has_both_forms() {
        let cfg = FuzzSettings::new(1..=2, 100, 3);
        let rep = explore_conjecture(&cfg, 1..=3, &[1.0]).unwrap();
        assert_eq!(rep.forms.len(), 2);
        assert!(rep.form(ConjectureForm::Exponential).is_some());
        assert!(rep.min_slack_at(1).is_some());
    }
}
