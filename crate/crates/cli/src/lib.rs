//! Scenario runner for the `tprf` command-line tool.

pub mod config;
pub mod error;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use config::{Command, Config, Scenario, Task};
pub use error::CliError;
pub use scenario::{run_scenario, sweep, Artifacts, Summary};

/// Loads, validates and runs a config file. Returns the artifacts and the
/// output stem (`out`, else the config's `output`, else the config path
/// without extension).
pub fn run_file(
    command: Command,
    config_path: &Path,
    out: Option<&Path>,
    jobs: Option<usize>,
) -> Result<(Artifacts, PathBuf), CliError> {
    let config = Config::load(config_path)?;
    let base_dir = config_path.parent().unwrap_or(Path::new("."));
    let (scenario, warnings) = config.resolve(command, base_dir)?;
    let artifacts = run_scenario(&scenario, warnings, jobs)?;
    let stem = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.as_ref().map(|o| base_dir.join(o)))
        .unwrap_or_else(|| config_path.with_extension(""));
    Ok((artifacts, stem))
}
