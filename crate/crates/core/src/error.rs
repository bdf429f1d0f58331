use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = EsmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EsmError {
    #[error("{function}: argument {x} outside the domain x > 0")]
    Domain { function: &'static str, x: f64 },

    #[error("clamped disk system is singular at mode n = {mode} (relative determinant {relative_det:e})")]
    SingularMode { mode: usize, relative_det: f64 },

    #[error(
        "MFS did not converge: relative boundary residual {residual:e} exceeds {tolerance:e} \
         (try a larger number of source points)"
    )]
    MfsConvergence { residual: f64, tolerance: f64 },

    #[error("eigendecomposition failed to converge after {iterations} iterations on a {size}x{size} matrix")]
    EigenConvergence { iterations: usize, size: usize },

    #[error("column {column} has zero norm; relative noise is undefined")]
    ZeroColumn { column: usize },

    #[error("every sampling point is degenerate (no eigenvalue above the cutoff or vanishing data)")]
    AllInvalid,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: unsupported format_version {found} (expected {expected})")]
    Version {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EsmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        EsmError::InvalidInput(msg.into())
    }
}
