use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} = {value} (limit {limit})")]
    Capacity {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("state is not normalized: |psi|^2 = {norm_sq}")]
    Normalization { norm_sq: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("band gap closes at k = {k:.6}, phase = {phase:.6} (gap {gap:.3e})")]
    GapClosed { k: f64, phase: f64, gap: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownPreset(_) | Error::Parameter(_) => 2,
            Error::Capacity { .. } => 3,
            Error::Numerical(_)
            | Error::Normalization { .. }
            | Error::GapClosed { .. }
            | Error::InvalidWindow(_)
            | Error::DimensionMismatch { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}
