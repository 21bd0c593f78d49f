//! Experiment runner behind the `revivals` binary.
//!
//! Each experiment reads an [`ExperimentConfig`], writes its data files
//! (CSV time series or JSON reports) into an output directory and adds a
//! `<stem>.meta.json` sidecar with the resolved configuration, library
//! version and wall time. Data files depend only on the configuration and
//! seed.

pub mod config;
mod experiments;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Experiment, ExperimentConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("size guard: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(#[source] revivals::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for configuration errors, 3 for numerical
    /// failures, 4 for size guards and 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<revivals::Error> for CliError {
    fn from(e: revivals::Error) -> Self {
        use revivals::Error as E;
        match e {
            E::Infeasible(n) => CliError::Infeasible(format!("problem size {n} exceeds the enumeration guard")),
            E::Parse(_) | E::InvalidSite { .. } | E::Io(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

/// Settings that come from the command line rather than the config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Worker threads; 0 uses all logical cores.
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    pub library_version: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub artifacts: Vec<String>,
    pub config: ExperimentConfig,
}

/// Files written by one run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
    pub metadata: PathBuf,
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Validates `config` and runs its experiment.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunSummary, CliError> {
    config.validate()?;
    let out_dir = options
        .out_dir
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir).map_err(|source| CliError::Io { path: out_dir.clone(), source })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let artifacts = pool.install(|| experiments::dispatch(config, &out_dir))?;
    let meta = Metadata {
        experiment: config.experiment().name().to_string(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        threads: pool.current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        artifacts: artifacts
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
        config: config.clone(),
    };
    let meta_path = out_dir.join(format!("{}.meta.json", config.experiment().stem()));
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    write_file(&meta_path, text.as_bytes())?;
    Ok(RunSummary { artifacts, metadata: meta_path })
}
