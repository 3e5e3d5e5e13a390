//! Experiment configuration: a problem, a list of labeled runs, and output
//! options, read from a single JSON document.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use uzawa::linalg::io::{read_matrix_market_file, read_vector_text_file};
use uzawa::problems::{generate_oseen, generate_synthetic, OseenSpec, SyntheticSpec};
use uzawa::solvers::{GmresParams, SaddleSystem, SolverConfig};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub runs: Vec<RunSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<TraceFormat>,
    /// Outer-loop parameters for the Navier-Stokes command.
    #[serde(default)]
    pub picard: PicardParams,
    /// Write cell-centered velocity/pressure grids after Navier-Stokes runs.
    #[serde(default)]
    pub export_fields: bool,
    /// Dense cap for the diagnose command.
    #[serde(default)]
    pub dense_cap: Option<usize>,
}

fn default_formats() -> Vec<TraceFormat> {
    vec![TraceFormat::Jsonl, TraceFormat::Csv]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemSpec {
    Oseen(OseenSpec),
    Synthetic(SyntheticSpec),
    /// Load a previously exported system from Matrix Market and vector files.
    Files {
        a: PathBuf,
        b: PathBuf,
        d: PathBuf,
        f: PathBuf,
        g: PathBuf,
    },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<SaddleSystem, CliError> {
        match self {
            ProblemSpec::Oseen(spec) => generate_oseen(spec).map_err(CliError::config),
            ProblemSpec::Synthetic(spec) => {
                Ok(generate_synthetic(spec).map_err(CliError::config)?.system)
            }
            ProblemSpec::Files { a, b, d, f, g } => {
                let a = read_matrix_market_file(a).map_err(CliError::io)?;
                let b = read_matrix_market_file(b).map_err(CliError::io)?;
                let d = read_matrix_market_file(d).map_err(CliError::io)?;
                let f = read_vector_text_file(f).map_err(CliError::io)?;
                let g = read_vector_text_file(g).map_err(CliError::io)?;
                SaddleSystem::new(a, b, d, f, g).map_err(CliError::config)
            }
        }
    }

    /// Replace the synthetic seed (no-op for deterministic problems).
    pub fn override_seed(&mut self, seed: u64) {
        if let ProblemSpec::Synthetic(spec) = self {
            spec.seed = seed;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uzawa: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gmres: Option<GmresParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardParams {
    #[serde(default = "default_outer_tol")]
    pub outer_tol: f64,
    #[serde(default = "default_max_picard")]
    pub max_picard: usize,
}

fn default_outer_tol() -> f64 {
    1e-6
}
fn default_max_picard() -> usize {
    100
}

impl Default for PicardParams {
    fn default() -> Self {
        PicardParams {
            outer_tol: default_outer_tol(),
            max_picard: default_max_picard(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self, need_runs: bool) -> Result<(), CliError> {
        if need_runs && self.runs.is_empty() {
            return Err(CliError::Config("no runs configured".into()));
        }
        let mut seen = HashSet::new();
        for run in &self.runs {
            if !seen.insert(run.label.as_str()) {
                return Err(CliError::Config(format!(
                    "duplicate run label: {}",
                    run.label
                )));
            }
            match (&run.uzawa, &run.gmres) {
                (Some(cfg), None) => cfg.validate().map_err(CliError::config)?,
                (None, Some(_)) => {}
                _ => {
                    return Err(CliError::Config(format!(
                        "run {} must set exactly one of 'uzawa' or 'gmres'",
                        run.label
                    )))
                }
            }
        }
        if self.formats.is_empty() {
            return Err(CliError::Config("formats must not be empty".into()));
        }
        Ok(())
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
    }
}
