use std::path::PathBuf;

use thiserror::Error;

/// A configuration value failed validation.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("simulation aborted at t = {t:.3} s: {detail}")]
    Unstable { t: f64, detail: String },

    #[error(
        "thrust bracket [{lo}, {hi}] does not contain a root for target {target} cm/s \
         (speeds {speed_lo:.3}..{speed_hi:.3} cm/s); try c_drag in [{drag_lo:.4}, {drag_hi:.4}]"
    )]
    Bracket {
        lo: f64,
        hi: f64,
        target: f64,
        speed_lo: f64,
        speed_hi: f64,
        drag_lo: f64,
        drag_hi: f64,
    },

    #[error("degenerate target line: start and end coincide")]
    DegenerateLine,

    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
