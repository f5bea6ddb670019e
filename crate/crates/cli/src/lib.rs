//! Batch front-end for the fdiab library: parameter sweeps, CSV output and canned figures.

pub mod figures;
pub mod runner;
pub mod sweep;

pub use runner::{run_sweep, write_csv, Row, RunOptions};
pub use sweep::{Axis, Engine, MetricKind, SweepSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Config or sweep input that cannot be used.
    #[error("{0}")]
    Parse(String),
    /// An evaluator failed on a valid input.
    #[error("{0}")]
    Eval(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Eval(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}
