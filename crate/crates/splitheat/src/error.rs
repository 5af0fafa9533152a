use std::path::PathBuf;

use thiserror::Error;

/// Errors of the harness and the command line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Solver(#[from] splitheat_core::Error),
    #[error("{0}")]
    Parameter(String),
    #[error("{path}:{line}: {msg}")]
    Config { path: PathBuf, line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status: 2 bad parameters, 3 blow-up guard, 4 solver
    /// non-convergence, 1 anything else (I/O).
    pub fn exit_code(&self) -> u8 {
        use splitheat_core::Error as E;
        match self {
            Error::Parameter(_) | Error::Config { .. } => 2,
            Error::Solver(e) => match e {
                E::Parameter(_) | E::DegenerateCell { .. } | E::NonFinite { .. } => 2,
                E::BlowUp { .. } => 3,
                E::Solver { .. } | E::PicardDivergence { .. } => 4,
            },
            Error::Io { .. } | Error::Csv(_) => 1,
        }
    }
}
