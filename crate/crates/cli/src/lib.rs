//! Command-line front end for `matconc`.
//!
//! Each verb reads an optional JSON config, applies flag overrides, runs one
//! experiment and writes a single report (JSON, or CSV for `bound`).

pub mod args;
pub mod config;
pub mod error;
pub mod run;

use args::Verb;
use config::resolve;
use error::CliError;
use run::Output;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Directory used for reports when `--out` is absent.
pub const OUT_DIR_ENV: &str = "MATCONC_OUT_DIR";

/// Resolve the configuration of `verb` and run it. Returns the output and the
/// `out` path requested in the configuration.
pub fn execute(verb: &Verb) -> Result<(Output, Option<String>), CliError> {
    let obj = verb.config_object()?;
    Ok(match verb {
        Verb::Bound(_) => {
            let c: config::BoundConfig = resolve(obj)?;
            (run::run_bound(&c)?, c.out)
        }
        Verb::Verify(_) => {
            let c: config::VerifyConfig = resolve(obj)?;
            (run::run_verify(&c)?, c.out)
        }
        Verb::Fuzz(_) => {
            let c: config::FuzzConfig = resolve(obj)?;
            (run::run_fuzz(&c)?, c.out)
        }
        Verb::Conjecture(_) => {
            let c: config::ConjectureConfig = resolve(obj)?;
            (run::run_conjecture(&c)?, c.out)
        }
        Verb::Couple(_) => {
            let c: config::CoupleConfig = resolve(obj)?;
            (run::run_couple(&c)?, c.out)
        }
        Verb::Tail(_) => {
            let c: config::TailConfig = resolve(obj)?;
            (run::run_tail(&c)?, c.out)
        }
        Verb::Replay(_) => {
            let c: config::ReplayConfig = resolve(obj)?;
            (run::run_replay(&c)?, c.out)
        }
    })
}

/// Run `verb`, write its report and map the result to an exit code.
pub fn main_with(verb: &Verb) -> i32 {
    let result = execute(verb).and_then(|(output, out)| {
        let path = run::destination(out.as_deref(), output.verb, output.extension);
        run::write_output(&output, path.as_deref())?;
        if let Some(p) = &path {
            let status = if output.pass { "PASS" } else { "FAIL" };
            eprintln!("{}: {status} -> {}", output.verb, p.display());
        }
        Ok(output.pass)
    });
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
