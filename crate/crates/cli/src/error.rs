//! Error type and exit-code mapping.

use std::path::Path;

use nematic_core::harmonic::HarmonicError;
use nematic_core::ldg::LdgError;
use nematic_core::of_strong::StrongError;
use nematic_core::of_weak::WeakError;
use nematic_core::pde::{PdeError, SolveReport};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("malformed table: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Path {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("solver: {message}")]
    Solver {
        message: String,
        report: Option<Box<SolveReport>>,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Path {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn solver(e: impl std::fmt::Display) -> Self {
        Self::Solver {
            message: e.to_string(),
            report: None,
        }
    }

    /// 2 for anything the user can fix in the configuration or paths,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Solver { .. } => 3,
            _ => 2,
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::NewtonDiverged(report) => Self::Solver {
                message: "PDE solver did not converge".into(),
                report: Some(report),
            },
            PdeError::InvalidGrid(_)
            | PdeError::InvalidBoundary(_)
            | PdeError::SingularAnisotropy { .. }
            | PdeError::FitUnavailable(_) => Self::Config(e.to_string()),
            other => Self::solver(other),
        }
    }
}

impl From<StrongError> for CliError {
    fn from(e: StrongError) -> Self {
        match e {
            StrongError::InvalidParameter(_)
            | StrongError::NoSpiralBranch { .. }
            | StrongError::SubcriticalInput { .. } => Self::Config(e.to_string()),
            other => Self::solver(other),
        }
    }
}

impl From<WeakError> for CliError {
    fn from(e: WeakError) -> Self {
        match e {
            WeakError::InvalidParameter(_) => Self::Config(e.to_string()),
            other => Self::solver(other),
        }
    }
}

impl From<HarmonicError> for CliError {
    fn from(e: HarmonicError) -> Self {
        match e {
            HarmonicError::InvalidParameter(_) | HarmonicError::InvalidTiling { .. } => {
                Self::Config(e.to_string())
            }
            other => Self::solver(other),
        }
    }
}

impl From<LdgError> for CliError {
    fn from(e: LdgError) -> Self {
        match e {
            LdgError::InvalidParameter(_) => Self::Config(e.to_string()),
            other => Self::solver(other),
        }
    }
}
