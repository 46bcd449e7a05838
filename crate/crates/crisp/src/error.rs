use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse {path}: {msg}")]
    ManifestParse { path: PathBuf, msg: String },
    #[error("shape mismatch in {path}: {msg}")]
    ShapeMismatch { path: PathBuf, msg: String },
    #[error("non-finite data in {path}: {msg}")]
    NonFiniteData { path: PathBuf, msg: String },
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error("config hash mismatch: primitives were fitted with {fitted}, eval config is {eval} (use --force to override)")]
    ConfigMismatch { fitted: String, eval: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] crisp_core::Error),
}

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

impl Error {
    pub fn parse(path: &Path, msg: impl ToString) -> Self {
        Error::ManifestParse {
            path: path.to_path_buf(),
            msg: msg.to_string(),
        }
    }

    pub fn shape(path: &Path, msg: impl ToString) -> Self {
        Error::ShapeMismatch {
            path: path.to_path_buf(),
            msg: msg.to_string(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Short machine-readable name for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ManifestParse { .. } => "ManifestParse",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::NonFiniteData { .. } => "NonFiniteData",
            Error::UnknownFormat(_) => "UnknownFormat",
            Error::ConfigMismatch { .. } => "ConfigMismatch",
            Error::Io { .. } => "Io",
            Error::Core(e) => match e {
                crisp_core::Error::DegenerateInput(_) => "DegenerateInput",
                crisp_core::Error::NonFinite(_) => "NonFiniteData",
                crisp_core::Error::InsufficientPoints { .. } => "InsufficientPoints",
                crisp_core::Error::InsufficientOverlap { .. } => "InsufficientOverlap",
                crisp_core::Error::EmptySet(_) => "EmptySet",
                crisp_core::Error::LengthMismatch(..) => "LengthMismatch",
                crisp_core::Error::ShapeMismatch(_) => "ShapeMismatch",
                crisp_core::Error::ScenarioMismatch { .. } => "ScenarioMismatch",
                crisp_core::Error::InvalidConfig(_) => "InvalidConfig",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(
                crisp_core::Error::DegenerateInput(_)
                | crisp_core::Error::InsufficientPoints { .. }
                | crisp_core::Error::InsufficientOverlap { .. }
                | crisp_core::Error::EmptySet(_),
            ) => EXIT_DEGENERATE,
            _ => EXIT_INPUT,
        }
    }
}
