//! Job runner behind the `planar-workbench` binary: config loading, the
//! analysis pipelines, text reports and JSON/CSV export.

pub mod config;
pub mod jobs;
pub mod output;

use std::fmt;

use planar_cocycles::semigroup::SemigroupError;
use planar_cocycles::thermo::ThermoError;
use serde::Serialize;
use thiserror::Error;

pub use config::{load_config, parse_config, JobConfig};
pub use jobs::{
    run_classify, run_equilibrium, run_example1, run_multicone, run_pressure, ClassificationReport, EquilibriumReport,
    MulticoneReport, PressureReport,
};

/// Pipeline stage an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Config,
    Kappa,
    Pressure,
    Classification,
    Equilibrium,
    Shadowing,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkbenchError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("matrix {0} is singular")]
    SingularMatrix(usize),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("[{stage}] cap exceeded: {message}")]
    CapExceeded { stage: Stage, message: String },
    #[error("[{stage}] {message}")]
    Failed { stage: Stage, message: String },
    #[error("class mismatch: {0}")]
    Mismatch(String),
}

impl WorkbenchError {
    /// Process exit code: 3 for parse and precondition failures, 4 for
    /// exceeded caps, 1 for a failed self-check.
    pub fn exit_code(&self) -> u8 {
        match self {
            WorkbenchError::CapExceeded { .. } => 4,
            WorkbenchError::Mismatch(_) => 1,
            _ => 3,
        }
    }

    pub(crate) fn semigroup(stage: Stage, e: SemigroupError) -> Self {
        match e {
            SemigroupError::CapExceeded { .. } => WorkbenchError::CapExceeded {
                stage,
                message: e.to_string(),
            },
            other => WorkbenchError::Failed {
                stage,
                message: other.to_string(),
            },
        }
    }

    pub(crate) fn thermo(stage: Stage, e: ThermoError) -> Self {
        match e {
            ThermoError::Semigroup(inner) => Self::semigroup(stage, inner),
            ThermoError::BadDepth(_) => WorkbenchError::CapExceeded {
                stage,
                message: e.to_string(),
            },
            other => WorkbenchError::Failed {
                stage,
                message: other.to_string(),
            },
        }
    }
}

/// Exit code of a successful run: 2 when some verdict was inconclusive.
pub fn success_code(inconclusive: bool) -> u8 {
    if inconclusive {
        2
    } else {
        0
    }
}
