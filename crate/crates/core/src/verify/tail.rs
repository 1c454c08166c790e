//! Monte Carlo survival curves with DKW bands, compared against bound curves.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundCurve;
use crate::error::{Error, Result};
use crate::matcore::{spectral_norm, HermitianMatrix};
use crate::rng;
use crate::stein::{MatrixModel, RectModel};

/// Scalar statistic of a sample of `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    LambdaMax,
    Norm,
}

impl Statistic {
    pub fn of(self, x: &HermitianMatrix) -> f64 {
        match self {
            Statistic::LambdaMax => x.lambda_max(),
            Statistic::Norm => x.op_norm(),
        }
    }
}

/// Two-sided DKW radius `√(ln(2/α) / (2n))`.
pub fn dkw_radius(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub t: f64,
    /// Fraction of samples with statistic `≥ t`.
    pub empirical: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_raw: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    pub statistic: Statistic,
    pub samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub radius: f64,
    pub points: Vec<SurvivalPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailComparison {
    pub curve: String,
    pub statistic: Statistic,
    pub samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub radius: f64,
    pub points: Vec<SurvivalPoint>,
    /// Grid points where `bound_raw + radius < empirical`.
    pub domination_violations: Vec<f64>,
    pub pass: bool,
}

fn check_inputs(samples: usize, t_grid: &[f64], alpha: f64) -> Result<()> {
    if samples < 100 {
        return Err(Error::Parameter(format!("need at least 100 samples, got {samples}")));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Parameter("t grid must be nonempty and finite".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Survival `P(stat ≥ t)` of a sorted sample at each grid point.
pub fn survival_from_sorted(sorted: &[f64], t_grid: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    t_grid
        .iter()
        .map(|&t| {
            let below = sorted.partition_point(|&x| x < t);
            (sorted.len() - below) as f64 / n
        })
        .collect()
}

fn build(statistic: Statistic, mut stats: Vec<f64>, seed: u64, t_grid: &[f64], alpha: f64) -> EmpiricalTail {
    stats.sort_by(f64::total_cmp);
    let surv = survival_from_sorted(&stats, t_grid);
    EmpiricalTail {
        statistic,
        samples: stats.len(),
        seed,
        alpha,
        radius: dkw_radius(stats.len(), alpha),
        points: t_grid
            .iter()
            .zip(surv)
            .map(|(&t, empirical)| SurvivalPoint { t, empirical, bound_raw: None })
            .collect(),
    }
}

/// Draw `samples` outcomes from stream 0 of `seed` and record the survival
/// of `stat(X)` on `t_grid`.
pub fn empirical_tail(
    model: &MatrixModel,
    statistic: Statistic,
    samples: usize,
    t_grid: &[f64],
    seed: u64,
    alpha: f64,
) -> Result<EmpiricalTail> {
    check_inputs(samples, t_grid, alpha)?;
    let mut r = rng::stream(seed, 0);
    let stats = (0..samples).map(|_| statistic.of(&model.x(&model.dist().sample(&mut r)))).collect();
    Ok(build(statistic, stats, seed, t_grid, alpha))
}

/// Survival of `‖H(Z) − E H‖` for a rectangular model, sampled like
/// [`empirical_tail`] so the draws coincide with those of its dilation.
pub fn empirical_tail_rect(
    model: &RectModel,
    samples: usize,
    t_grid: &[f64],
    seed: u64,
    alpha: f64,
) -> Result<EmpiricalTail> {
    check_inputs(samples, t_grid, alpha)?;
    let mean = model
        .mean
        .clone()
        .ok_or_else(|| Error::Precondition(format!("rectangular model {} has no mean", model.name)))?;
    let mut r = rng::stream(seed, 0);
    let mut stats = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z = model.dist.sample(&mut r);
        stats.push(spectral_norm((model.h)(&z).try_sub(&mean)?.as_mat()));
    }
    Ok(build(Statistic::Norm, stats, seed, t_grid, alpha))
}

impl EmpiricalTail {
    pub fn compare(&self, curve: &BoundCurve) -> Result<TailComparison> {
        let mut points = Vec::with_capacity(self.points.len());
        let mut violations = Vec::new();
        for p in &self.points {
            let raw = curve.eval(p.t)?.raw;
            if raw + self.radius < p.empirical {
                violations.push(p.t);
            }
            points.push(SurvivalPoint { bound_raw: Some(raw), ..p.clone() });
        }
        Ok(TailComparison {
            curve: curve.describe(),
            statistic: self.statistic,
            samples: self.samples,
            seed: self.seed,
            alpha: self.alpha,
            radius: self.radius,
            points,
            pass: violations.is_empty(),
            domination_violations: violations,
        })
    }

    /// Largest deviation from an exact survival function on the grid.
    pub fn max_deviation(&self, exact: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().map(|p| (p.empirical - exact(p.t)).abs()).fold(0.0, f64::max)
    }
}

/// Evenly spaced grid `lo, lo + step, …` up to and including `hi`.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parameter(format!("bad grid {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(Error::Parameter("grid has more than a million points".into()));
    }
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}
