//! Command-line driver: certify datasets, run parameter sweeps, run the
//! exhaustive oracle suite and turn sweep results into plot-ready series.

pub mod certify;
pub mod oracle_check;
pub mod output;
pub mod plotdata;
pub mod settings;
pub mod sweep;
pub mod synth;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hiersmooth_core::Error;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;

/// An error with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: msg.into() }
    }

    pub fn failure(msg: impl Into<String>) -> Self {
        Self { code: EXIT_FAILURE, message: msg.into() }
    }

    /// Errors raised while validating configuration values.
    pub fn from_config(e: Error) -> Self {
        Self::config(e.to_string())
    }

    /// Errors raised while running on loaded data.
    pub fn from_run(e: Error) -> Self {
        match e {
            Error::InvalidParam(_) | Error::Incompatible(_) | Error::Domain(_) => Self::config(e.to_string()),
            Error::Dimension(_) | Error::Parse { .. } => Self::data(e.to_string()),
            _ => Self::failure(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hiersmooth", version, about = "Certified robustness under hierarchical randomized smoothing")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "HIERSMOOTH_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify every sample of a dataset.
    Certify(RunArgs),
    /// Evaluate a grid or random draw of smoothing parameters and extract the Pareto front.
    Sweep(SweepArgs),
    /// Check the certificates against exhaustive enumeration.
    OracleCheck(OracleArgs),
    /// Convert sweep outputs into per-method scatter and front series.
    Plotdata(PlotArgs),
    /// Write a synthetic train/test dataset.
    Synth(SynthArgs),
    /// List configuration keys and their defaults.
    Keys,
    /// List built-in classifiers.
    Classifiers,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Key-value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration key; repeatable, applied in order.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Discard progress from an earlier interrupted run in the output directory.
    #[arg(long)]
    pub fresh: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Tolerance for the bound identities.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Tolerance for the region-mass identities.
    #[arg(long, default_value_t = 1e-12)]
    pub accounting_tolerance: f64,
    /// Scale every perturbed region mass by this factor before comparing.
    #[arg(long, value_name = "FACTOR")]
    pub inject_fault: Option<f64>,
    /// Largest number of rows to enumerate (1 to 3).
    #[arg(long, default_value_t = 3)]
    pub max_rows: usize,
    /// Random Gaussian comparison points.
    #[arg(long, default_value_t = 1000)]
    pub gaussian_points: usize,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Sweep output directories or `trials.jsonl` files.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub n_train: usize,
    #[arg(long, default_value_t = 100)]
    pub n_test: usize,
    #[arg(long, default_value_t = 6)]
    pub rows: usize,
    #[arg(long, default_value_t = 4)]
    pub cols: usize,
    /// binary or real
    #[arg(long, default_value = "binary")]
    pub domain: String,
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.6)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.2)]
    pub corruption: f64,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::config("workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::failure(format!("cannot start worker pool: {e}")))?;
    }
    match cli.command {
        Command::Certify(a) => certify::run(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::OracleCheck(a) => oracle_check::run(&a),
        Command::Plotdata(a) => plotdata::run(&a),
        Command::Synth(a) => synth::run(&a),
        Command::Keys => {
            for (k, default, help) in settings::RunConfig::known_keys() {
                println!("{k:<18} {:<20} {help}", default.unwrap_or("-"));
            }
            Ok(())
        }
        Command::Classifiers => {
            for (name, help) in hiersmooth_core::harness::builtin_classifiers() {
                println!("{name:<34} {help}");
            }
            Ok(())
        }
    }
}

/// Build the configuration for `certify` and `sweep`.
pub fn resolve(args: &RunArgs) -> Result<settings::RunConfig, CliError> {
    let mut cfg = settings::RunConfig::defaults();
    if let Some(path) = &args.config {
        cfg.merge_file(path)?;
    }
    for pair in &args.set {
        cfg.assign(pair)?;
    }
    let path_str = |p: &PathBuf| p.display().to_string();
    if let Some(p) = &args.dataset {
        cfg.set("dataset", &path_str(p))?;
    }
    if let Some(p) = &args.train {
        cfg.set("train", &path_str(p))?;
    }
    if let Some(c) = &args.classifier {
        cfg.set("classifier", c)?;
    }
    if let Some(s) = args.seed {
        cfg.set("seed", &s.to_string())?;
    }
    if let Some(p) = &args.out {
        cfg.set("out", &path_str(p))?;
    }
    Ok(cfg)
}
