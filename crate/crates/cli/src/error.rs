use std::fmt;
use std::process::ExitCode;

use ng_core::harness::HarnessError;
use ng_core::io::SpaceFileError;
use ng_core::novelty::NoveltyError;
use ng_core::sampling::SamplingError;
use ng_core::worlds::WorldError;
use ng_core::MetricError;

/// Failure of one command, carrying the exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing input files, impossible configs. Exit 2.
    Usage(String),
    /// Inputs that parse but break a model invariant. Exit 3.
    Validation(String),
    /// Enumeration or generation budget exhausted. Exit 4.
    Budget(String),
    /// Both solution spaces empty; no distance defined. Exit 5.
    Inconclusive(String),
    /// Could not write outputs. Exit 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Inconclusive(_) => 5,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Validation(m) => ("invalid input", m),
            CliError::Budget(m) => ("budget exceeded", m),
            CliError::Inconclusive(m) => ("inconclusive", m),
            CliError::Io(m) => ("i/o", m),
        };
        write!(f, "{tag}: {msg}")
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::EmptySolutionSpaces => CliError::Inconclusive(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<WorldError> for CliError {
    fn from(e: WorldError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<NoveltyError> for CliError {
    fn from(e: NoveltyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SamplingError> for CliError {
    fn from(e: SamplingError) -> Self {
        match e {
            SamplingError::EnumerationBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            SamplingError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            SamplingError::Metric(m) => m.into(),
            SamplingError::World(w) => w.into(),
            SamplingError::Novelty(n) => n.into(),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            HarnessError::GenerationFailed { .. } => CliError::Budget(e.to_string()),
            HarnessError::Sampling(s) => s.into(),
            HarnessError::Novelty(n) => n.into(),
            HarnessError::World(w) => w.into(),
            HarnessError::Metric(m) => m.into(),
        }
    }
}

impl From<SpaceFileError> for CliError {
    fn from(e: SpaceFileError) -> Self {
        CliError::Validation(e.to_string())
    }
}
