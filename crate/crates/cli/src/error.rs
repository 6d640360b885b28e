use etconsensus::periodic::PeriodicError;
use etconsensus::scenario::ScenarioError;
use etconsensus::EngineError;
use thiserror::Error;

/// Failures sorted by exit code: 1 for bad input, 2 for runtime problems.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::DimensionMismatch { .. }
            | EngineError::BadHorizon(_)
            | EngineError::NotBalanced { .. }
            | EngineError::NotStronglyConnected { .. }
            | EngineError::BadSchedule(_)
            | EngineError::Trigger(_) => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<PeriodicError> for CliError {
    fn from(e: PeriodicError) -> Self {
        match e {
            PeriodicError::Engine(inner) => inner.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
