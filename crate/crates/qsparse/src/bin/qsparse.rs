//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsparse::cli::{
    cmd_check_ops, cmd_gen_data, cmd_gradcheck, cmd_run, ConfigSource, EXIT_VALIDATION,
};
use qsparse::ops::InputDistribution;

#[derive(Parser)]
#[command(
    name = "qsparse",
    about = "Distributed SGD with quantized, sparsified, error-compensated updates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment from a TOML config or a built-in preset.
    Run {
        /// Path to the config file (or use --preset).
        config: Option<PathBuf>,
        /// Built-in preset name (paper-convex).
        #[arg(long)]
        preset: Option<String>,
        /// Override a config key, e.g. --set run.T=100 (repeatable).
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },
    /// Verify the compression property across the operator catalog.
    CheckOps {
        #[arg(long, default_value_t = 256)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Input distribution: normal | heavy | sparse.
        #[arg(long, default_value = "normal")]
        dist: String,
    },
    /// Finite-difference gradient check for one objective.
    Gradcheck {
        /// quadratic | softmax | nonconvex-logistic
        #[arg(long)]
        objective: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a synthetic dataset in IDX format.
    GenData {
        /// Dataset kind (classification).
        #[arg(long, default_value = "classification")]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d_in: usize,
        #[arg(long)]
        classes: usize,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for images.idx and labels.idx.
        #[arg(long)]
        out: PathBuf,
    },
}

/// QSPARSE_THREADS caps engine parallelism; 0 means serial.
fn threads_from_env() -> Option<usize> {
    std::env::var("QSPARSE_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, preset, set } => {
            let overrides: Vec<(String, String)> = match set
                .iter()
                .map(|s| {
                    s.split_once('=')
                        .map(|(k, v)| (k.to_string(), v.to_string()))
                        .ok_or(s)
                })
                .collect::<Result<Vec<_>, _>>()
            {
                Ok(o) => o,
                Err(bad) => {
                    eprintln!("error: --set '{bad}' must look like section.key=value");
                    return ExitCode::from(EXIT_VALIDATION as u8);
                }
            };
            match (&config, &preset) {
                (Some(path), None) => {
                    cmd_run(ConfigSource::File(path), &overrides, threads_from_env())
                }
                (None, Some(name)) => {
                    cmd_run(ConfigSource::Preset(name), &overrides, threads_from_env())
                }
                _ => {
                    eprintln!("error: give exactly one of CONFIG or --preset");
                    EXIT_VALIDATION
                }
            }
        }
        Command::CheckOps {
            dim,
            trials,
            seed,
            dist,
        } => match dist.parse::<InputDistribution>() {
            Ok(distribution) => cmd_check_ops(dim, trials, seed, distribution),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_VALIDATION
            }
        },
        Command::Gradcheck { objective, seed } => cmd_gradcheck(&objective, seed),
        Command::GenData {
            kind,
            n,
            d_in,
            classes,
            margin,
            seed,
            out,
        } => cmd_gen_data(&kind, n, d_in, classes, margin, seed, &out),
    };
    ExitCode::from(code as u8)
}
