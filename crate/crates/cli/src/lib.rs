//! Orchestration behind the `ductsr` binary: data generation, fitting,
//! filtering and reporting, each as a plain function writing into the
//! configured output directory.

mod commands;
mod config;

use thiserror::Error;

pub use commands::{
    cmd_filter, cmd_fit, cmd_generate, cmd_report, format_case_table, format_frontier, frontier_paths,
    target_from_path, EquationReport, FILTER_REPORT,
};
pub use config::{RunConfig, DEFAULT_OUT_DIR, OUT_DIR_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNSAT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed files, unwritable paths.
    #[error("{0}")]
    Input(String),
    /// Solver divergence or non-finite results.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}
