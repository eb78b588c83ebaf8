use std::io;
use std::path::PathBuf;

use thiserror::Error;

use smir_core::abm::AbmError;
use smir_core::contactnet::ContactNetError;
use smir_core::infonet::InfoNetError;
use smir_core::meanfield::MeanFieldError;
use smir_core::scenario::ScenarioError;

/// Exit status for bad arguments or unreadable/invalid input.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for numeric failures during a run.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        code: i32,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn stage<E: ExitClass + std::error::Error + Send + Sync + 'static>(stage: &'static str, e: E) -> Self {
        CliError::Stage {
            stage,
            code: e.exit_code(),
            source: Box::new(e),
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Stage { code, .. } => *code,
        }
    }

    pub fn stage_name(&self) -> Option<&'static str> {
        match self {
            CliError::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

/// Whether an engine error reflects bad input or a numeric failure.
pub trait ExitClass {
    fn exit_code(&self) -> i32;
}

impl ExitClass for MeanFieldError {
    fn exit_code(&self) -> i32 {
        match self {
            MeanFieldError::InvalidParams(_) | MeanFieldError::InvalidSolver(_) => EXIT_USAGE,
            MeanFieldError::NonfiniteState { .. } => EXIT_NUMERIC,
            MeanFieldError::SweepPoint { source, .. } => source.exit_code(),
        }
    }
}

impl ExitClass for ContactNetError {
    fn exit_code(&self) -> i32 {
        match self {
            ContactNetError::Saturation { .. } | ContactNetError::RetryBudgetExceeded { .. } => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        }
    }
}

impl ExitClass for ScenarioError {
    fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Scenario(e) => e.exit_code(),
            _ => EXIT_USAGE,
        }
    }
}

impl ExitClass for InfoNetError {
    fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

impl ExitClass for AbmError {
    fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

impl ExitClass for io::Error {
    fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}
