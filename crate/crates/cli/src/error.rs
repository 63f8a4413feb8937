use std::path::PathBuf;

use ballotflow::{AggregationError, CalibrationError, ModelError, SimulationError, StrategyError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}, column {column}: {message}")]
    ConfigParse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("config has no `{0}` block")]
    MissingBlock(&'static str),

    #[error("{path}: row {row}: {message}")]
    Data {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Strategy(#[from] StrategyError),

    #[error(transparent)]
    Simulation(#[from] SimulationError),

    #[error(transparent)]
    Aggregation(#[from] AggregationError),

    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl std::fmt::Display) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.to_string(),
        }
    }

    /// 2 for bad input, 3 for I/O, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Strategy(StrategyError::NoBracket(_))
            | CliError::Calibration(CalibrationError::Unattainable { .. }) => 4,
            _ => 2,
        }
    }
}
