use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the command line, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

/// Exit code for a run that finished but did not converge within `max_outer`.
pub const EXIT_NOT_CONVERGED: i32 = 5;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<cpscore::Error> for CliError {
    fn from(e: cpscore::Error) -> Self {
        use cpscore::Error as E;
        let msg = e.to_string();
        match e {
            E::EmptySet { .. } | E::InvalidScale(_) | E::InvalidVariance(_) | E::InvalidParameter(_) => {
                CliError::Usage(msg)
            }
            E::NotSymmetric(_)
            | E::ShapeMismatch(_)
            | E::NonBinaryAttributes(..)
            | E::EmptyData
            | E::NotPSD(_)
            | E::InvalidWeights { .. }
            | E::ZeroVector => CliError::Data(msg),
            E::NotPD
            | E::NonFinite(_)
            | E::NoConvergence(_)
            | E::InfeasibleStart(_)
            | E::SingularAtZeroPenalty
            | E::Infeasible(_) => CliError::Numerical(msg),
        }
    }
}
