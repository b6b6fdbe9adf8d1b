//! Experiment harness for the `epimit` command-line tool: config parsing,
//! scenario construction, task execution and CSV output.

pub mod config;
pub mod experiment;
pub mod scenario;
pub mod seeds;
pub mod system_file;

use std::fs;
use std::path::Path;

pub use config::{parse_config, validate_config, ConfigIssue, ExperimentConfig};
pub use experiment::{run_experiment, write_csv, Row, RunError, CSV_HEADER};
pub use seeds::derive_seed;

/// Reads, validates and runs the config at `path`, returning the CSV bytes.
pub fn run_config_file(path: &Path) -> Result<(Vec<Row>, Vec<u8>), RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Config(vec![ConfigIssue::new(path.display().to_string(), e.to_string())]))?;
    let cfg = parse_config(&text).map_err(RunError::Config)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let rows = run_experiment(&cfg, base)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).map_err(|e| RunError::Runtime(e.to_string()))?;
    Ok((rows, csv))
}
