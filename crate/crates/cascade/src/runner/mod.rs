//! Scenario files, run manifests, and the command implementations behind
//! the `cascade` binary.
//!
//! Every file-emitting command writes into one output directory: the parsed
//! scenario echoed back in canonical form, the CSV datasets, a short
//! `summary.txt`, and last a `manifest.json` listing each emitted file with
//! its SHA-256 checksum. Reruns of the same command with the same seed
//! produce byte-identical files, so manifests can be diffed directly.

mod commands;
mod figures;
mod manifest;
mod scenario_file;

pub use commands::{
    cmd_analyze, cmd_reproduce, cmd_simulate, cmd_sweep_attacker_load, cmd_sweep_h_curve,
    cmd_sweep_node_load, cmd_validate, AnalyzeReport, CheckStatus, FigureId, ValidateConfig,
    ValidationCheck, ValidationReport,
};
pub use figures::{figure_scenario, FigureScale};
pub use manifest::{FileChecksum, OutDir, RunManifest};
pub use scenario_file::{parse_scenario, parse_scenario_str, serialize_scenario};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),

    #[error(transparent)]
    Analytic(#[from] crate::analytic::AnalyticError),

    #[error(transparent)]
    Oracle(#[from] crate::oracle::OracleError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Invalid(String),
}

impl RunnerError {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        RunnerError::Io {
            context: context.into(),
            source,
        }
    }
}
