//! The `qconvex` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a property or requested
//! assertion fails, 2 on input or configuration errors. Inputs are fully
//! validated and all computation finishes before any artifact is written, so
//! exit code 2 never leaves files behind.

mod config;
mod hull;
mod levi;
mod peak;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{DomainFile, FunctionFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "qconvex", version, about = "Levi signatures, q-holomorphicity residuals, discrete hulls and peak functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Levi matrices, signatures and q-convexity of a function at points.
    Levi(CommonArgs),
    /// Strict and weak q-pseudoconvexity at boundary points of a domain.
    Classify(CommonArgs),
    /// q-holomorphicity residuals of a function over sample points.
    Qholo(CommonArgs),
    /// Discrete q-holomorphic hull of a sample against a function family.
    Hull(CommonArgs),
    /// Randomized separation experiment for the reciprocal-type family.
    Thm2(CommonArgs),
    /// Construct and verify an almost-peak function on a model domain.
    Peak(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON artifacts; the JSON report goes to
    /// stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override NAME=VALUE (repeatable).
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Worker threads for point sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v: f64 = value.trim().parse().map_err(|_| format!("invalid value in {s:?}"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("tolerance must be finite and nonnegative, got {s:?}"));
    }
    Ok((name.trim().to_string(), v))
}

/// Tolerance overrides; each subcommand claims the names it understands.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tolerances(BTreeMap<String, f64>);

impl Tolerances {
    fn new(pairs: &[(String, f64)]) -> Self {
        Tolerances(pairs.iter().cloned().collect())
    }

    /// Rejects names outside `allowed`.
    pub(crate) fn restrict(&self, allowed: &[&str]) -> Result<(), CliError> {
        for name in self.0.keys() {
            if !allowed.contains(&name.as_str()) {
                return Err(CliError::input(format!(
                    "unknown tolerance {name:?}; this subcommand accepts: {}",
                    if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

/// Everything a subcommand needs besides its own configuration.
pub(crate) struct Context {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub tol: Tolerances,
}

impl Context {
    /// Directory against which relative paths inside the config resolve.
    pub(crate) fn base_dir(&self) -> &Path {
        self.config.parent().unwrap_or(Path::new("."))
    }
}

/// Result of a subcommand, not yet written anywhere.
pub(crate) struct Outcome {
    /// Artifact file name and contents; the first entry is the JSON report.
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
    pub passed: bool,
}

/// Runs the command line given by `args` (including the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (common, f): (&CommonArgs, Handler) = match &cli.command {
        Command::Levi(a) => (a, levi::cmd_levi),
        Command::Classify(a) => (a, levi::cmd_classify),
        Command::Qholo(a) => (a, levi::cmd_qholo),
        Command::Hull(a) => (a, hull::cmd_hull),
        Command::Thm2(a) => (a, hull::cmd_thm2),
        Command::Peak(a) => (a, peak::cmd_peak),
    };
    match execute(common, f) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

type Handler = fn(&Context) -> Result<Outcome, CliError>;

fn execute(common: &CommonArgs, f: Handler) -> Result<i32, CliError> {
    if common.threads == Some(0) {
        return Err(CliError::input("--threads must be positive"));
    }
    let ctx = Context {
        config: common.config.clone(),
        seed: common.seed,
        tol: Tolerances::new(&common.tol),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker threads: {e}")))?;
    let outcome = pool.install(|| f(&ctx))?;
    match &common.out {
        Some(dir) => write_artifacts(dir, &outcome.files)?,
        None => {
            if let Some((_, report)) = outcome.files.first() {
                println!("{}", String::from_utf8_lossy(report));
            }
        }
    }
    eprintln!("{} {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.summary);
    Ok(if outcome.passed { EXIT_OK } else { EXIT_FAILURE })
}

fn write_artifacts(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("reports serialize");
    out.push(b'\n');
    out
}

/// Named pass/fail assertion in a report.
#[derive(Debug, Clone, serde::Serialize)]
pub(crate) struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub(crate) fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

pub(crate) fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}
