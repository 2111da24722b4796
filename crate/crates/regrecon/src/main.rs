use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use regrecon::config::ExperimentConfig;
use regrecon::experiments::{self, RunError};

/// Reproducible experiment driver for the regularity-structure library.
#[derive(Parser, Debug)]
#[command(name = "regrecon", version, about)]
struct Cli {
    /// Experiment name (see `--list`)
    experiment: Option<String>,
    /// Path to the experiment config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for summaries and tables (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// List available experiments
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for name in experiments::experiment_names() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    let experiment = cli
        .experiment
        .ok_or_else(|| "an experiment name is required (try --list)".to_string())?;
    let config_path = cli
        .config
        .ok_or_else(|| "--config <file> is required".to_string())?;
    let raw = std::fs::read_to_string(&config_path)
        .map_err(|e| format!("cannot read {}: {e}", config_path.display()))?;
    let mut config = ExperimentConfig::parse(&raw).map_err(|e| e.to_string())?;
    if config.experiment.name != experiment {
        config.experiment.name = experiment;
    }
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    if let Some(out) = cli.out {
        config.experiment.out = out;
    }

    let outcome = experiments::run(&config, &raw).map_err(|e| match e {
        RunError::UnknownExperiment(name) => {
            format!("unknown experiment {name:?}; try --list")
        }
        other => other.to_string(),
    })?;

    let out_dir = &config.experiment.out;
    std::fs::create_dir_all(out_dir).map_err(|e| e.to_string())?;
    let summary_path = out_dir.join(format!("{}.summary.json", outcome.experiment));
    let summary = serde_json::to_string_pretty(&outcome.summary_json())
        .expect("summary serializes");
    std::fs::write(&summary_path, format!("{summary}\n")).map_err(|e| e.to_string())?;
    for (name, csv) in &outcome.tables {
        let path = out_dir.join(format!("{}.{name}.csv", outcome.experiment));
        std::fs::write(path, csv).map_err(|e| e.to_string())?;
    }
    println!(
        "{}: {} (summary: {})",
        outcome.experiment,
        if outcome.pass { "PASS" } else { "FAIL" },
        summary_path.display()
    );
    Ok(outcome.pass)
}
