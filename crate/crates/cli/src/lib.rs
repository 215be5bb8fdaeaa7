//! Scenario runner for the `decohere` simulator.
//!
//! A scenario is a TOML file (see [`scenario`]) that selects an engine,
//! a spectrum, the optical elements and the quantities to report. Running
//! it yields a [`CurveOutput`] table and, optionally, density-matrix dumps.

pub mod output;
pub mod presets;
pub mod runner;
pub mod scenario;

use thiserror::Error;

pub use output::{dump_matrix, parse_matrix, Cell, CurveOutput};
pub use runner::{run_scenario, Overrides, RunOutput};
pub use scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("validation error: {field}: {message}")]
    Validation { field: String, message: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl RunError {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        RunError::Validation { field: field.into(), message: message.into() }
    }

    /// Wraps an engine error raised while processing scenario key `key`.
    pub(crate) fn engine(key: &str, e: decohere::Error) -> Self {
        if e.is_numerical() {
            RunError::Numerical(e.to_string())
        } else {
            RunError::validation(key, e.to_string())
        }
    }

    /// Process exit status: 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 2,
            _ => 1,
        }
    }
}
