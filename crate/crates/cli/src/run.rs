use std::io::Write;
use std::path::{Path, PathBuf};

use matconc::bounds::{bounded_diff_sigma, BoundCurve, BoundKind, CompoundCovSpec};
use matconc::matcore::HermitianMatrix;
use matconc::stein::{
    bounded_diff_demo, coupling_stats, default_horizon, default_s_grid, simulate_kernel_coupling, sup_norm,
    CouplingStats, EstimatedKernel, EstimationMethod, Kernel, ModelSpec, PoissonKernel, ENUMERATION_BUDGET,
};
use matconc::verify::{self, Statistic, WorstCase};
use serde::Serialize;
use serde_json::Value;

use crate::config::*;
use crate::error::CliError;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// A finished run: the report body and whether the verb's check passed.
#[derive(Debug)]
pub struct Output {
    pub verb: &'static str,
    pub extension: &'static str,
    pub body: String,
    pub pass: bool,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    schema_version: u32,
    verb: &'a str,
    config: &'a C,
    pass: bool,
    report: R,
}

fn json_output<C: Serialize, R: Serialize>(
    verb: &'static str,
    config: &C,
    pass: bool,
    report: R,
) -> Result<Output, CliError> {
    let env = Envelope { schema_version: SCHEMA_VERSION, verb, config, pass, report };
    let mut body = serde_json::to_string_pretty(&env).map_err(|e| CliError::runtime(e.to_string()))?;
    body.push('\n');
    Ok(Output { verb, extension: "json", body, pass })
}

pub fn run_bound(cfg: &BoundConfig) -> Result<Output, CliError> {
    let ts = cfg.t.points()?;
    let curve = BoundCurve::new(cfg.bound.clone());
    let mut buf = Vec::new();
    curve.write_csv(&ts, &mut buf)?;
    let body = String::from_utf8(buf).map_err(|e| CliError::runtime(e.to_string()))?;
    Ok(Output { verb: "bound", extension: "csv", body, pass: true })
}

fn build_kernel(
    cfg: &VerifyConfig,
    model: &matconc::stein::MatrixModel,
    e: &matconc::stein::Enumeration,
) -> Result<Box<dyn Kernel>, CliError> {
    let horizon = || -> Result<usize, CliError> {
        match cfg.horizon {
            Some(h) if h > 0 => Ok(h),
            Some(_) => Err(CliError::config("horizon must be positive")),
            None => Ok(default_horizon(model.n(), sup_norm(model), cfg.horizon_tol)?),
        }
    };
    Ok(match cfg.kernel {
        KernelChoice::Exact => Box::new(PoissonKernel::new(e)?),
        KernelChoice::Path => Box::new(EstimatedKernel::new(model, e, horizon()?, EstimationMethod::PathEnumeration)?),
        KernelChoice::MonteCarlo => {
            let method =
                EstimationMethod::MonteCarlo { samples: cfg.samples.unwrap_or(0), seed: cfg.seed.unwrap_or(0) };
            Box::new(EstimatedKernel::new(model, e, horizon()?, method)?)
        }
    })
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<Output, CliError> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let pairs = cfg.theta_psi.clone().unwrap_or_else(verify::default_theta_psi);
    let s_grid = cfg.s_grid.clone().unwrap_or_else(default_s_grid);
    let report = match cfg.check {
        Check::PolyEfronStein => verify::verify_poly_efron_stein(&model, &cfg.p)?,
        Check::ExpEfronStein => verify::verify_exp_efron_stein(&model, &pairs)?,
        check => {
            let e = model.enumerate(ENUMERATION_BUDGET)?;
            let k = build_kernel(cfg, &model, &e)?;
            match check {
                Check::KernelPolyMoments => verify::verify_kernel_poly_moments(&e, k.as_ref(), &cfg.p, &s_grid)?,
                Check::KernelExpMoments => verify::verify_kernel_exp_moments(&e, k.as_ref(), &pairs, &s_grid)?,
                _ => verify::verify_kernel_identities(&e, k.as_ref())?,
            }
        }
    };
    json_output("verify", cfg, report.pass, report)
}

pub fn run_fuzz(cfg: &FuzzConfig) -> Result<Output, CliError> {
    let s = cfg.settings()?;
    let q = cfg.q.lo..=cfg.q.hi;
    let report = match cfg.ineq {
        Inequality::Pmvti => verify::fuzz_pmvti(&s, q, &cfg.s_values)?,
        Inequality::Emvti => verify::fuzz_emvti(&s, &cfg.s_values)?,
        Inequality::YoungCommuting => verify::fuzz_young_commuting(&s, &cfg.p_values)?,
        Inequality::OperatorCs => verify::fuzz_operator_cs(&s)?,
        Inequality::MatrixEntropyYoung => verify::fuzz_matrix_entropy_young(&s, cfg.ensemble_size)?,
    };
    json_output("fuzz", cfg, report.pass, report)
}

/// Exploration never fails; the per-form `pass` fields carry the outcome.
pub fn run_conjecture(cfg: &ConjectureConfig) -> Result<Output, CliError> {
    let s = cfg.settings()?;
    let report = verify::explore_conjecture(&s, cfg.q.lo..=cfg.q.hi, &cfg.s_values)?;
    json_output("conjecture", cfg, true, report)
}

#[derive(Serialize)]
struct CoupleReport {
    model: String,
    z: Vec<f64>,
    z_prime: Vec<f64>,
    stats: CouplingStats,
    z_score: f64,
}

/// Antipodal default start: first and last support value of each coordinate.
fn default_start(model: &matconc::stein::MatrixModel, last: bool) -> Result<Vec<f64>, CliError> {
    model
        .dist()
        .coords()
        .iter()
        .map(|c| match c {
            matconc::stein::Coordinate::Finite { values, .. } => {
                Ok(if last { *values.last().unwrap() } else { values[0] })
            }
            _ => Err(CliError::config("continuous coordinates need explicit z and z_prime")),
        })
        .collect()
}

pub fn run_couple(cfg: &CoupleConfig) -> Result<Output, CliError> {
    let seed = cfg.seed()?;
    let model = cfg.model.build()?;
    let z = match &cfg.z {
        Some(z) => z.clone(),
        None => default_start(&model, false)?,
    };
    let zp = match &cfg.z_prime {
        Some(z) => z.clone(),
        None => default_start(&model, true)?,
    };
    let stats = coupling_stats(&model, &z, &zp, cfg.runs, cfg.max_steps, seed, cfg.jobs)?;
    if let Some(path) = &cfg.trajectory {
        let run = simulate_kernel_coupling(&model, &z, &zp, cfg.max_steps, seed)?;
        let mut f = create(Path::new(path))?;
        run.write_json_lines(&mut f)?;
    }
    let pass = stats.coupled == stats.runs && stats.pathwise_violations == 0;
    let report = CoupleReport { model: model.name().to_string(), z, z_prime: zp, z_score: stats.z_score(), stats };
    json_output("couple", cfg, pass, report)
}

/// Bound and statistic implied by a builtin model, if any.
fn default_bound(spec: &ModelSpec) -> Result<(BoundKind, Statistic), CliError> {
    match spec {
        ModelSpec::HypercubeSum { n, d } => {
            // (H − H^{(j)})² ≼ 4E₁₁, so σ² = ‖Σ_j 4E₁₁‖ = 4n.
            Ok((BoundKind::BoundedDiff { d: *d, sigma2: 4.0 * *n as f64 }, Statistic::LambdaMax))
        }
        ModelSpec::BoundedDiff { n, d, seed } => {
            let (_, a) = bounded_diff_demo(*n, *d, *seed)?;
            Ok((BoundKind::BoundedDiff { d: *d, sigma2: bounded_diff_sigma(&a)? }, Statistic::LambdaMax))
        }
        ModelSpec::CompoundCovariance { p, n, b, entry } => {
            let b = b.clone().unwrap_or_else(|| HermitianMatrix::identity(*n));
            let spec = CompoundCovSpec::new(*p, *n, entry.variance(), 1.0, b)?;
            Ok((BoundKind::CompoundCov(spec), Statistic::Norm))
        }
        _ => Err(CliError::config("this model has no default bound; supply one with --bound")),
    }
}

pub fn run_tail(cfg: &TailConfig) -> Result<Output, CliError> {
    let seed = cfg.seed()?;
    let model = cfg.model.build()?;
    let (bound, statistic) = match (&cfg.bound, cfg.statistic) {
        (Some(b), s) => (b.clone(), s.unwrap_or(Statistic::LambdaMax)),
        (None, s) => {
            let (b, default_stat) = default_bound(&cfg.model)?;
            (b, s.unwrap_or(default_stat))
        }
    };
    let grid = cfg.t.points()?;
    let tail = verify::empirical_tail(&model, statistic, cfg.samples, &grid, seed, cfg.alpha)?;
    let cmp = tail.compare(&BoundCurve::new(bound))?;
    json_output("tail", cfg, cmp.pass, cmp)
}

#[derive(Serialize)]
struct ReplayReport {
    recorded_slack: f64,
    trial: usize,
    outcome: verify::ReplayOutcome,
}

fn find_worst_case(v: &Value) -> Result<WorstCase, CliError> {
    if v.get("inputs").is_some() {
        return serde_json::from_value(v.clone()).map_err(|e| CliError::config(format!("worst case: {e}")));
    }
    if let Some(r) = v.get("report") {
        return find_worst_case(r);
    }
    if let Some(w) = v.get("worst_case") {
        if w.is_null() {
            return Err(CliError::config("report has no worst case"));
        }
        return find_worst_case(w);
    }
    if let Some(Value::Array(forms)) = v.get("forms") {
        let worst = forms
            .iter()
            .filter(|f| f.get("worst_case").is_some_and(|w| !w.is_null()))
            .min_by(|a, b| {
                let s = |x: &Value| x.get("min_slack").and_then(Value::as_f64).unwrap_or(f64::INFINITY);
                s(a).total_cmp(&s(b))
            })
            .ok_or_else(|| CliError::config("conjecture report has no worst case"))?;
        return find_worst_case(worst);
    }
    Err(CliError::config("input holds no worst case"))
}

pub fn run_replay(cfg: &ReplayConfig) -> Result<Output, CliError> {
    let text =
        std::fs::read_to_string(&cfg.input).map_err(|e| CliError::config(format!("cannot read {}: {e}", cfg.input)))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", cfg.input)))?;
    let case = find_worst_case(&v)?;
    let outcome = verify::replay(&case)?;
    let pass = outcome.reproduced && outcome.slack >= -cfg.tolerance;
    let report = ReplayReport { recorded_slack: case.slack, trial: case.trial, outcome };
    json_output("replay", cfg, pass, report)
}

fn create(path: &Path) -> Result<std::fs::File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::File::create(path)?)
}

/// Where a report goes: `--out`, else `$MATCONC_OUT_DIR/<verb>.<ext>`, else
/// standard output (`None`).
pub fn destination(out: Option<&str>, verb: &str, ext: &str) -> Option<PathBuf> {
    if let Some(o) = out {
        return Some(PathBuf::from(o));
    }
    std::env::var_os(crate::OUT_DIR_ENV)
        .filter(|d| !d.is_empty())
        .map(|d| PathBuf::from(d).join(format!("{verb}.{ext}")))
}

pub fn write_output(out: &Output, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => create(p)?.write_all(out.body.as_bytes())?,
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(out.body.as_bytes())?;
            s.flush()?;
        }
    }
    Ok(())
}
