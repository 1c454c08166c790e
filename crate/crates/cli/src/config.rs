//! Typed run configurations. A JSON file and command-line flags are both
//! turned into JSON objects, merged key by key with flags taking precedence,
//! and only then deserialized, so both sources obey the same schema.

use std::fmt;
use std::str::FromStr;

use matconc::bounds::BoundKind;
use matconc::stein::ModelSpec;
use matconc::verify::{Ensemble, Statistic};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub type Object = Map<String, Value>;

/// Recursive merge: objects merge key by key, anything else is replaced.
/// A nested object whose `kind` or `name` tag changes is replaced whole.
pub fn merge(base: &mut Object, over: Object) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Object(b)), Value::Object(o)) if same_tag(b, &o) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn same_tag(a: &Object, b: &Object) -> bool {
    ["kind", "name"].iter().all(|t| match (a.get(*t), b.get(*t)) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    })
}

pub fn parse_object(text: &str, origin: &str) -> Result<Object, CliError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::config(format!("{origin}: configuration must be a JSON object"))),
        Err(e) => Err(CliError::config(format!("{origin}: {e}"))),
    }
}

pub fn resolve<T: DeserializeOwned>(obj: Object) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(obj)).map_err(|e| CliError::config(e.to_string()))
}

/// A grid written either as `"lo:hi:step"` or as an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range(String),
    List(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Grid::List(v) if v.is_empty() => Err(CliError::config("grid is empty")),
            Grid::List(v) => Ok(v.clone()),
            Grid::Range(s) => {
                let parts: Vec<f64> = s
                    .split(':')
                    .map(|x| f64::from_str(x.trim()))
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::config(format!("grid {s:?} is not lo:hi:step")))?;
                match parts[..] {
                    [lo, hi, step] => Ok(matconc::verify::linear_grid(lo, hi, step)?),
                    _ => Err(CliError::config(format!("grid {s:?} is not lo:hi:step"))),
                }
            }
        }
    }
}

/// `lo..=hi` written as `"lo:hi"` or `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RangeRepr", into = "RangeRepr")]
pub struct IntRange {
    pub lo: u32,
    pub hi: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RangeRepr {
    Text(String),
    Pair([u32; 2]),
}

impl TryFrom<RangeRepr> for IntRange {
    type Error = String;
    fn try_from(r: RangeRepr) -> Result<Self, String> {
        let (lo, hi) = match r {
            RangeRepr::Pair([lo, hi]) => (lo, hi),
            RangeRepr::Text(s) => {
                let bad = || format!("range {s:?} is not lo:hi");
                let (a, b) = s.split_once(':').ok_or_else(bad)?;
                (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
            }
        };
        if lo > hi {
            return Err(format!("range {lo}:{hi} is empty"));
        }
        Ok(IntRange { lo, hi })
    }
}

impl From<IntRange> for RangeRepr {
    fn from(r: IntRange) -> Self {
        RangeRepr::Pair([r.lo, r.hi])
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

fn require_seed(seed: Option<u64>, verb: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::config(format!("{verb} is stochastic and needs an explicit seed")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub bound: BoundKind,
    pub t: Grid,
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    PolyEfronStein,
    ExpEfronStein,
    KernelPolyMoments,
    KernelExpMoments,
    KernelIdentities,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    /// Poisson-equation kernel.
    #[default]
    Exact,
    /// Coupling series evaluated by propagating the pair law.
    Path,
    /// Coupling series estimated by simulation.
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub check: Check,
    pub model: ModelSpec,
    #[serde(default = "default_p")]
    pub p: Vec<u32>,
    #[serde(default)]
    pub theta_psi: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub s_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub kernel: KernelChoice,
    #[serde(default)]
    pub horizon: Option<usize>,
    /// Target truncation error when the horizon is derived.
    #[serde(default = "default_horizon_tol")]
    pub horizon_tol: f64,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
}

fn default_p() -> Vec<u32> {
    vec![1, 2, 3]
}

fn default_horizon_tol() -> f64 {
    1e-8
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.kernel == KernelChoice::MonteCarlo {
            require_seed(self.seed, "a Monte Carlo kernel")?;
            if self.samples.is_none_or(|s| s == 0) {
                return Err(CliError::config("a Monte Carlo kernel needs samples > 0"));
            }
        }
        if self.horizon_tol.is_nan() || self.horizon_tol <= 0.0 {
            return Err(CliError::config("horizon_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    Pmvti,
    Emvti,
    YoungCommuting,
    OperatorCs,
    MatrixEntropyYoung,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzConfig {
    pub ineq: Inequality,
    #[serde(default = "default_fuzz_trials")]
    pub trials: usize,
    #[serde(default = "default_dims")]
    pub dims: IntRange,
    #[serde(default = "default_q")]
    pub q: IntRange,
    #[serde(default = "matconc::verify::default_s_values")]
    pub s_values: Vec<f64>,
    #[serde(default = "default_young_p")]
    pub p_values: Vec<f64>,
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default = "default_fuzz_tol")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_jobs", skip_serializing)]
    pub jobs: usize,
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
}

fn default_fuzz_trials() -> usize {
    10_000
}

fn default_dims() -> IntRange {
    IntRange { lo: 1, hi: 6 }
}

fn default_q() -> IntRange {
    IntRange { lo: 1, hi: 7 }
}

fn default_young_p() -> Vec<f64> {
    vec![1.5, 2.0, 3.0]
}

fn default_ensemble_size() -> usize {
    8
}

fn default_fuzz_tol() -> f64 {
    matconc::verify::FUZZ_TOL
}

fn default_jobs() -> usize {
    1
}

impl FuzzConfig {
    pub fn settings(&self) -> Result<matconc::verify::FuzzSettings, CliError> {
        let seed = require_seed(self.seed, "fuzz")?;
        settings(self.dims, self.trials, seed, self.jobs, &self.ensemble, self.tolerance)
    }
}

fn settings(
    dims: IntRange,
    trials: usize,
    seed: u64,
    jobs: usize,
    ensemble: &Ensemble,
    tolerance: f64,
) -> Result<matconc::verify::FuzzSettings, CliError> {
    let mut s = matconc::verify::FuzzSettings::new(dims.lo as usize..=dims.hi as usize, trials, seed).jobs(jobs);
    s.ensemble = ensemble.clone();
    s.tolerance = tolerance;
    s.validate()?;
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjectureConfig {
    #[serde(default = "default_conjecture_trials")]
    pub trials: usize,
    #[serde(default = "default_dims")]
    pub dims: IntRange,
    #[serde(default = "default_q")]
    pub q: IntRange,
    #[serde(default = "matconc::verify::default_s_values")]
    pub s_values: Vec<f64>,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_jobs", skip_serializing)]
    pub jobs: usize,
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
}

fn default_conjecture_trials() -> usize {
    100_000
}

impl ConjectureConfig {
    pub fn settings(&self) -> Result<matconc::verify::FuzzSettings, CliError> {
        let seed = require_seed(self.seed, "conjecture")?;
        settings(self.dims, self.trials, seed, self.jobs, &self.ensemble, matconc::verify::FUZZ_TOL)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub z: Option<Vec<f64>>,
    #[serde(default)]
    pub z_prime: Option<Vec<f64>>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Write the trajectory of run 0 as JSON lines to this path.
    #[serde(default, skip_serializing)]
    pub trajectory: Option<String>,
    #[serde(default = "default_jobs", skip_serializing)]
    pub jobs: usize,
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
}

fn default_runs() -> usize {
    10_000
}

fn default_max_steps() -> usize {
    1_000_000
}

impl CoupleConfig {
    pub fn seed(&self) -> Result<u64, CliError> {
        require_seed(self.seed, "couple")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub model: ModelSpec,
    /// Bound curve to compare against; derived from the model when omitted.
    #[serde(default)]
    pub bound: Option<BoundKind>,
    #[serde(default)]
    pub statistic: Option<Statistic>,
    #[serde(default = "default_tail_samples")]
    pub samples: usize,
    #[serde(default = "default_tail_grid")]
    pub t: Grid,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
}

fn default_tail_samples() -> usize {
    100_000
}

fn default_tail_grid() -> Grid {
    Grid::Range("0:12:0.25".into())
}

fn default_alpha() -> f64 {
    0.01
}

impl TailConfig {
    pub fn seed(&self) -> Result<u64, CliError> {
        require_seed(self.seed, "tail")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayConfig {
    /// A worst case, a fuzz report, a conjecture report, or a report envelope.
    pub input: String,
    #[serde(default = "default_fuzz_tol")]
    pub tolerance: f64,
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn obj(v: Value) -> Object {
        match v {
            Value::Object(m) => m,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_file_keys() {
        let mut base = obj(json!({"trials": 5, "model": {"kind": "hypercube_sum", "n": 3, "d": 2}}));
        merge(&mut base, obj(json!({"trials": 7, "model": {"kind": "hypercube_sum", "n": 4}})));
        assert_eq!(Value::Object(base), json!({"trials": 7, "model": {"kind": "hypercube_sum", "n": 4, "d": 2}}));
        let mut base = obj(json!({"model": {"kind": "random_binary", "n": 3, "seed": 2}}));
        merge(&mut base, obj(json!({"model": {"kind": "hypercube_sum", "n": 4}})));
        assert_eq!(Value::Object(base), json!({"model": {"kind": "hypercube_sum", "n": 4}}));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let r: Result<FuzzConfig, _> = resolve(obj(json!({"ineq": "emvti", "trails": 3})));
        assert!(r.is_err());
    }

    #[test]
    fn grids_and_ranges() {
        assert_eq!(Grid::Range("0:1:0.5".into()).points().unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(Grid::Range("0:1".into()).points().is_err());
        let r: IntRange = serde_json::from_value(json!("2:5")).unwrap();
        assert_eq!((r.lo, r.hi), (2, 5));
        assert!(serde_json::from_value::<IntRange>(json!("5:2")).is_err());
    }

    #[test]
    fn fuzz_requires_seed() {
        let c: FuzzConfig = resolve(obj(json!({"ineq": "emvti"}))).unwrap();
        assert!(c.settings().is_err());
    }
}
