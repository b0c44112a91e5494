use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: lo={lo} > hi={hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is numerically singular (column {column} norm {norm:e}); redraw required")]
    SingularMatrix { column: usize, norm: f64 },

    #[error("could not draw a full-rank matrix after {attempts} attempts")]
    RedrawExhausted { attempts: usize },

    #[error("unknown scenario `{0}` (expected f1..f15)")]
    UnknownScenario(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("evaluation budget exhausted after {used} evaluations")]
    BudgetExhausted { used: u64 },

    #[error("no sealed environments; E_BBC undefined")]
    NoSealedEnvironments,

    #[error("grouping is not a partition of 0..{dimension}: {reason}")]
    InvalidGrouping { dimension: usize, reason: String },

    #[error("invalid optimizer parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
