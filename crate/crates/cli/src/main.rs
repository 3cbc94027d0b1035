use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boost_core::config::{Experiment, ExperimentConfig};
use boost_core::experiments::{predict_almost_periods, run_experiment, write_prediction, RunOptions};
use boost_core::{BoostError, Result};
use clap::{Parser, Subcommand, ValueEnum};

/// Topological energy pumping and Fock-state boosting experiments.
#[derive(Parser, Debug)]
#[command(name = "boost", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a registered experiment and write CSV data with JSON manifests.
    Run {
        /// Experiment name; falls back to `experiment` in the config file.
        experiment: Option<String>,
        /// TOML config; the paper-fig1 preset when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; defaults to `output_dir` in the config, then `out/<experiment>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the bare cavity frequency instead of ω + [δω₀]_θ.
        #[arg(long)]
        no_correction: bool,
        /// Recorded in manifests. All experiments are deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a prediction table.
    Predict {
        #[arg(value_enum)]
        what: Prediction,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write almost_periods.csv and its manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_correction: bool,
    },
    /// List registered experiments.
    List,
    /// Print the paper-fig1 preset as TOML.
    Preset,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Prediction {
    AlmostPeriods,
}

fn load(config: Option<&Path>) -> Result<ExperimentConfig> {
    match config {
        Some(path) => ExperimentConfig::load(path),
        None => Ok(ExperimentConfig::paper_fig1()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            experiment,
            config,
            out,
            no_correction,
            seed,
        } => {
            let cfg = load(config.as_deref())?;
            let experiment: Experiment = match (experiment, cfg.experiment) {
                (Some(name), _) => name.parse()?,
                (None, Some(e)) => e,
                (None, None) => {
                    return Err(BoostError::Config(
                        "no experiment given on the command line or in the config".into(),
                    ))
                }
            };
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));
            let summary = run_experiment(experiment, &cfg, &out, &RunOptions { no_correction, seed })?;
            for f in &summary.files {
                println!("{}", f.display());
            }
            eprintln!("{} finished in {:.1} s", experiment.name(), summary.wall_time_s);
        }
        Command::Predict {
            what: Prediction::AlmostPeriods,
            config,
            out,
            no_correction,
        } => {
            let cfg = load(config.as_deref())?;
            let corrected = cfg.prediction.corrected && !no_correction;
            let prediction = predict_almost_periods(&cfg, corrected)?;
            print!("{}", prediction.render_text());
            if let Some(dir) = out {
                let path = write_prediction(&cfg, &prediction, &dir, None)?;
                eprintln!("wrote {}", path.display());
            }
        }
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<30} {}", e.name(), e.description());
            }
        }
        Command::Preset => print!("{}", ExperimentConfig::paper_fig1().to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
