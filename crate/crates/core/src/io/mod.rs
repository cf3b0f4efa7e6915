//! Scenario files, CSV output and the command implementations behind the
//! `tofguard` binary.

pub mod commands;
pub mod config;
pub mod csv;

use std::path::PathBuf;

use thiserror::Error;

use crate::harness::ScenarioError;

pub use commands::{calibrate, detect, emit, simulate, sweep, CalibrationReport};
pub use config::{parse_scenario, parse_scenario_str, render_scenario, ConfigError, ScenarioFile};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const RUNTIME: i32 = 4;
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", .path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Stream(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("frames: {0}")]
    Frames(String),
    #[error("bad argument: {0}")]
    Argument(String),
    #[error("invalid scenario: {0}")]
    Validation(ScenarioError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl IoError {
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Config(ConfigError::Parse { .. }) | IoError::Argument(_) => exit::PARSE,
            IoError::Scenario(ScenarioError::UnknownParameter(_)) => exit::PARSE,
            IoError::Config(ConfigError::Validation { .. }) | IoError::Validation(_) => {
                exit::VALIDATION
            }
            _ => exit::RUNTIME,
        }
    }
}
