use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ions {0} and {1} coincide or are out of order")]
    Collision(usize, usize),

    #[error("equilibrium solve did not converge after {iterations} iterations (max |dV/dx| = {residual:e} N)")]
    EquilibriumNotConverged { iterations: usize, residual: f64 },

    #[error("unstable configuration: Hessian eigenvalue {0:e} N/m is not positive")]
    Unstable(f64),

    #[error("Hessian is singular")]
    SingularHessian,

    #[error("uniform-spacing verification failed: max spacing error {error:e} m exceeds {limit:e} m")]
    SpacingVerification { error: f64, limit: f64 },

    #[error("trap design did not converge after {iterations} iterations (best nearest-neighbour relative std {best:e})")]
    DesignNotConverged { iterations: usize, best: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("unknown species `{0}`")]
    UnknownSpecies(String),

    #[error("{path}: {message}")]
    SpeciesFile { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code. Configuration problems share codes with
    /// [`crate::config::ConfigError`]; numerical failures use 7.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::SpeciesFile { .. } => 4,
            Error::UnknownSpecies(_) => 5,
            Error::Io { .. } | Error::Serialize(_) => 6,
            _ => 7,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
