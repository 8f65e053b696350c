//! Run orchestration for the NLS bifurcation toolkit: configuration parsing,
//! scenario execution, and artifact emission (branch CSVs, bifurcation
//! records, scaling summaries, SVG diagrams, and an execution manifest).

pub mod config;
pub mod scenarios;
pub mod svg;

use config::{ConfigError, RunConfig, Scenario};
use scenarios::{manifest, Executor, ScenarioError};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Process exit codes: 0 success, 2 configuration error, 3 numerical
/// failure.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(ScenarioError),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(e) => write!(f, "{e}"),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

/// Load the configuration, execute the scenario, and write all artifacts
/// plus the manifest into the output directory.
pub fn run_from_file(
    scenario: Scenario,
    config_path: &Path,
    out_override: Option<PathBuf>,
    workers: usize,
    allow_unverified: bool,
) -> Result<(RunConfig, Vec<PathBuf>, String), RunError> {
    let mut cfg = RunConfig::parse_file(config_path, scenario).map_err(RunError::Config)?;
    if let Some(out) = out_override {
        cfg.output_dir = out;
    }
    run(cfg, workers, allow_unverified)
}

pub fn run(
    cfg: RunConfig,
    workers: usize,
    allow_unverified: bool,
) -> Result<(RunConfig, Vec<PathBuf>, String), RunError> {
    let started = Instant::now();
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
        RunError::Config(ConfigError {
            message: format!("cannot create output dir {}: {e}", cfg.output_dir.display()),
            line: None,
        })
    })?;
    let exec = Executor { cfg, allow_unverified, workers: workers.max(1) };
    let out = exec.run().map_err(RunError::Numerical)?;
    let mut artifacts = out.artifacts;
    let manifest_text = manifest(&exec.cfg, started.elapsed().as_millis(), &artifacts);
    let manifest_path = exec.cfg.output_dir.join("manifest.txt");
    std::fs::write(&manifest_path, manifest_text).map_err(|e| {
        RunError::Numerical(ScenarioError { stage: "manifest".into(), message: e.to_string() })
    })?;
    artifacts.push(manifest_path);
    Ok((exec.cfg, artifacts, out.summary))
}
