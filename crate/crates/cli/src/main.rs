use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use revivals_cli::{run, CliError, Experiment, ExperimentConfig, RunOptions};

/// Exact-diagonalization experiments on revivals, scrambling and recovery.
#[derive(Parser)]
#[command(name = "revivals", version)]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all logical cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::for_experiment(cli.experiment),
    };
    if let Some(seed) = cli.common.seed {
        config.seed = seed;
    }
    let config = config.resolve(cli.experiment)?;
    let summary = run(&config, &RunOptions { out_dir: cli.common.out, threads: cli.common.threads })?;
    for path in summary.artifacts.iter().chain(std::iter::once(&summary.metadata)) {
        println!("{}", path.display());
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
