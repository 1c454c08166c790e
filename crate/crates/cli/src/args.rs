//! Command-line flags. Each verb turns its flags into a JSON object that is
//! merged over the optional `--config` file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::config::{merge, parse_object, Object};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "matconc", version, about = "Matrix concentration bounds, checks and simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Evaluate a tail bound over a grid of t and write CSV.
    Bound(BoundArgs),
    /// Run an exact check on a finite model.
    Verify(VerifyArgs),
    /// Randomized trace-inequality suite.
    Fuzz(FuzzArgs),
    /// Explore the signed mean value conjecture.
    Conjecture(ConjectureArgs),
    /// Coupling-time statistics of the kernel coupling.
    Couple(CoupleArgs),
    /// Empirical survival against a bound curve.
    Tail(TailArgs),
    /// Re-evaluate a serialized worst case.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; defaults to $MATCONC_OUT_DIR/<verb>.<ext>, else stdout.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Builtin model: hypercube_sum, bounded_diff, compound_covariance,
    /// random_binary, rectangular_demo.
    #[arg(long)]
    pub model: Option<String>,
    /// JSON model specification.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Row count `p` of the compound covariance model.
    #[arg(long)]
    pub cov_p: Option<usize>,
    /// Entry law of the compound covariance model: rademacher or uniform.
    #[arg(long)]
    pub entry: Option<String>,
    /// Seed used to build a seeded builtin model.
    #[arg(long)]
    pub model_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: Common,
    /// gaussexp, self_bounded, bounded_diff, dobrushin, compound_cov, haar.
    #[arg(long)]
    pub name: Option<String>,
    /// JSON bound specification.
    #[arg(long)]
    pub bound_file: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub tv_seq: Option<Vec<f64>>,
    /// Grid `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    /// poly_efron_stein, exp_efron_stein, kernel_poly_moments,
    /// kernel_exp_moments, kernel_identities.
    #[arg(long)]
    pub check: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<u32>>,
    /// JSON list of `[theta, psi]` pairs.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_psi: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<f64>>,
    /// exact, path or monte_carlo.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub horizon_tol: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    #[command(flatten)]
    pub common: Common,
    /// pmvti, emvti, young_commuting, operator_cs, matrix_entropy_young.
    #[arg(long)]
    pub ineq: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Dimension range `lo:hi`.
    #[arg(long)]
    pub dims: Option<String>,
    /// Exponent range `lo:hi` for pmvti.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub s_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub p_values: Option<Vec<f64>>,
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConjectureArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub s_values: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CoupleArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z_prime: Option<Vec<f64>>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Write run 0's trajectory as JSON lines.
    #[arg(long)]
    pub trajectory: Option<String>,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Bound specification as inline JSON.
    #[arg(long)]
    pub bound: Option<String>,
    /// lambda_max or norm.
    #[arg(long)]
    pub statistic: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Default)]
struct Overrides(Object);

impl Overrides {
    fn put<T: Serialize>(&mut self, key: &str, v: &Option<T>) {
        if let Some(v) = v {
            self.0.insert(key.to_string(), serde_json::to_value(v).expect("flag values serialize"));
        }
    }

    fn put_json(&mut self, key: &str, text: &Option<String>) -> Result<(), CliError> {
        if let Some(t) = text {
            let v: Value = serde_json::from_str(t).map_err(|e| CliError::config(format!("--{key}: {e}")))?;
            self.0.insert(key.to_string(), v);
        }
        Ok(())
    }
}

fn read_object(path: &PathBuf) -> Result<Object, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse_object(&text, &path.display().to_string())
}

fn model_overrides(m: &ModelArgs) -> Result<Option<Object>, CliError> {
    let mut o = match &m.model_file {
        Some(p) => read_object(p)?,
        None => Object::new(),
    };
    let mut f = Overrides::default();
    f.put("kind", &m.model);
    f.put("n", &m.n);
    f.put("d", &m.d);
    f.put("rows", &m.rows);
    f.put("cols", &m.cols);
    f.put("p", &m.cov_p);
    f.put("entry", &m.entry);
    f.put("seed", &m.model_seed);
    merge(&mut o, f.0);
    Ok(if o.is_empty() { None } else { Some(o) })
}

impl Verb {
    pub fn name(&self) -> &'static str {
        match self {
            Verb::Bound(_) => "bound",
            Verb::Verify(_) => "verify",
            Verb::Fuzz(_) => "fuzz",
            Verb::Conjecture(_) => "conjecture",
            Verb::Couple(_) => "couple",
            Verb::Tail(_) => "tail",
            Verb::Replay(_) => "replay",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Verb::Bound(a) => &a.common,
            Verb::Verify(a) => &a.common,
            Verb::Fuzz(a) => &a.common,
            Verb::Conjecture(a) => &a.common,
            Verb::Couple(a) => &a.common,
            Verb::Tail(a) => &a.common,
            Verb::Replay(a) => &a.common,
        }
    }

    /// The configuration file merged with the flags.
    pub fn config_object(&self) -> Result<Object, CliError> {
        let common = self.common();
        let mut base = match &common.config {
            Some(p) => read_object(p)?,
            None => Object::new(),
        };
        let mut f = Overrides::default();
        f.put("out", &common.out);
        match self {
            Verb::Bound(a) => {
                let mut b = match &a.bound_file {
                    Some(p) => read_object(p)?,
                    None => Object::new(),
                };
                let mut g = Overrides::default();
                g.put("name", &a.name);
                g.put("d", &a.d);
                g.put("v", &a.v);
                g.put("c", &a.c);
                g.put("sigma2", &a.sigma2);
                g.put("p", &a.p);
                g.put("n", &a.n);
                g.put("l", &a.l);
                g.put("r", &a.r);
                g.put("s", &a.s);
                g.put("tv_seq", &a.tv_seq);
                merge(&mut b, g.0);
                if !b.is_empty() {
                    f.0.insert("bound".into(), Value::Object(b));
                }
                f.put("t", &a.t);
            }
            Verb::Verify(a) => {
                f.put("model", &model_overrides(&a.model)?);
                f.put("check", &a.check);
                f.put("p", &a.p);
                f.put_json("theta_psi", &a.theta_psi)?;
                f.put("s_grid", &a.s_grid);
                f.put("kernel", &a.kernel);
                f.put("horizon", &a.horizon);
                f.put("horizon_tol", &a.horizon_tol);
                f.put("samples", &a.samples);
                f.put("seed", &a.seed);
            }
            Verb::Fuzz(a) => {
                f.put("ineq", &a.ineq);
                f.put("trials", &a.trials);
                f.put("dims", &a.dims);
                f.put("q", &a.q);
                f.put("s_values", &a.s_values);
                f.put("p_values", &a.p_values);
                f.put("ensemble_size", &a.ensemble_size);
                f.put("tolerance", &a.tolerance);
                f.put("seed", &a.seed);
                f.put("jobs", &a.jobs);
            }
            Verb::Conjecture(a) => {
                f.put("trials", &a.trials);
                f.put("dims", &a.dims);
                f.put("q", &a.q);
                f.put("s_values", &a.s_values);
                f.put("seed", &a.seed);
                f.put("jobs", &a.jobs);
            }
            Verb::Couple(a) => {
                f.put("model", &model_overrides(&a.model)?);
                f.put("z", &a.z);
                f.put("z_prime", &a.z_prime);
                f.put("runs", &a.runs);
                f.put("max_steps", &a.max_steps);
                f.put("seed", &a.seed);
                f.put("jobs", &a.jobs);
                f.put("trajectory", &a.trajectory);
            }
            Verb::Tail(a) => {
                f.put("model", &model_overrides(&a.model)?);
                f.put_json("bound", &a.bound)?;
                f.put("statistic", &a.statistic);
                f.put("samples", &a.samples);
                f.put("t", &a.t);
                f.put("alpha", &a.alpha);
                f.put("seed", &a.seed);
            }
            Verb::Replay(a) => {
                f.put("input", &a.input);
                f.put("tolerance", &a.tolerance);
            }
        }
        merge(&mut base, f.0);
        Ok(base)
    }
}
