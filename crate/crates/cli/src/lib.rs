//! Configuration-driven experiment runner for `mide-core`.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiments;

use artifacts::{write_outcome, Outcome, RunInfo};
use config::ExperimentConfig;
use error::CliResult;
use std::path::{Path, PathBuf};

/// Directory used when neither the command line nor the config names one.
pub const DEFAULT_OUT_DIR: &str = "mide-out";

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub tol_scale: Option<f64>,
}

/// A finished run.
#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub outcome: Outcome,
}

impl RunReport {
    /// 0 when every assertion passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.outcome.failures() > 0)
    }
}

/// Loads, validates and runs one config file, writing its artifacts to
/// `<out_dir>/<name>/`. Configuration errors surface before anything is written.
pub fn run_config(path: &Path, opts: &RunOptions) -> CliResult<RunReport> {
    let (cfg, text) = ExperimentConfig::load(path)?;
    let tol_scale = opts.tol_scale.unwrap_or(1.0);
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(error::CliError::Config(format!("tol-scale {tol_scale} must be positive")));
    }
    let seed = opts.seed.unwrap_or(cfg.seed);
    let root = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let dir = root.join(&cfg.name);
    let outcome = experiments::run(&cfg, &experiments::Context { seed, tol_scale })?;
    let info = RunInfo { name: &cfg.name, kind: cfg.experiment.kind(), seed, tol_scale, config_text: &text };
    let manifest = write_outcome(&dir, &info, &outcome)?;
    Ok(RunReport { dir, manifest, outcome })
}
