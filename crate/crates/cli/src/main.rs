//! `mide`: run, validate and list experiments.

use clap::{Parser, Subcommand};
use mide_cli::config::{ExperimentConfig, KINDS};
use mide_cli::{run_config, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "mide", version, about = "Numerical experiments for mixed local and nonlocal elliptic equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more experiment configs.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Overrides the seed of every config.
        #[arg(long)]
        seed: Option<u64>,
        /// Root directory for artifacts; each run writes to `<out-dir>/<name>/`.
        #[arg(long, env = "MIDE_OUT_DIR")]
        out_dir: Option<PathBuf>,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Multiplies every solver tolerance.
        #[arg(long)]
        tol_scale: Option<f64>,
    },
    /// Parse and check configs without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// List the experiment kinds.
    ListExperiments,
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Run { configs, seed, out_dir, jobs, tol_scale } => {
            if let Some(j) = jobs {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            let opts = RunOptions { seed, out_dir, tol_scale };
            for path in &configs {
                if let Err(e) = ExperimentConfig::load(path) {
                    eprintln!("{}: {e}", path.display());
                    return ExitCode::from(e.exit_code() as u8);
                }
            }
            let mut worst = 0;
            for path in &configs {
                match run_config(path, &opts) {
                    Ok(report) => {
                        for n in &report.outcome.notes {
                            println!("  {n}");
                        }
                        println!(
                            "{}: {} passed, {} failed -> {}",
                            report.dir.display(),
                            report.outcome.passes(),
                            report.outcome.failures(),
                            report.manifest.display()
                        );
                        worst = worst.max(report.exit_code());
                    }
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        worst = worst.max(e.exit_code());
                    }
                }
            }
            worst
        }
        Command::Validate { configs } => {
            let mut worst = 0;
            for path in &configs {
                match ExperimentConfig::load(path) {
                    Ok((cfg, _)) => println!("{}: ok ({} '{}')", path.display(), cfg.experiment.kind(), cfg.name),
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        worst = worst.max(e.exit_code());
                    }
                }
            }
            worst
        }
        Command::ListExperiments => {
            for (kind, about) in KINDS {
                println!("{kind:<12} {about}");
            }
            0
        }
    };
    ExitCode::from(code as u8)
}
