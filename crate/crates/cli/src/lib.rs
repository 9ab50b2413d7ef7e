//! Experiment runner behind the `palmshift` binary: config parsing,
//! dispatch to the library checks, and report rendering.

pub mod config;
pub mod report;
pub mod run;
pub mod spec;

use std::path::{Path, PathBuf};

pub use config::Config;
pub use report::{emit, from_json_line, to_json_line, Format, Outcome, ReportRecord, StatisticRecord, CSV_HEADER};
pub use run::run;
pub use spec::{ExperimentKind, ExperimentSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("report: {0}")]
    Report(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] palmshift_core::Error),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// The experiment files named by `path`: the file itself, or every
/// `*.toml` file in the directory, sorted by name.
pub fn config_paths(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(io(path))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(CliError::Config(format!("no .toml files in {}", path.display())));
    }
    Ok(out)
}

/// Reads one experiment file, applying an optional seed override.
pub fn load_spec(path: &Path, seed: Option<u64>) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    let mut config = Config::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        let s = i64::try_from(s).map_err(|_| CliError::Config("seed must be below 2^63".into()))?;
        config.set("seed", toml::Value::Integer(s));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    ExperimentSpec::from_config(&config, stem).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
