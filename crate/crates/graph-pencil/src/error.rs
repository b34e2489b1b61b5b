//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or graph invariant was violated by the caller's input.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A file could not be parsed; carries the 1-based line number when known.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An enumeration or counting request exceeded its stated budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A requested glyph is not present in a count table.
    #[error("glyph ({l},{c},{r},e={e}) not present in count table")]
    MissingGlyph { l: usize, c: usize, r: usize, e: bool },

    /// The pencil matrices are singular or the block degrees coincide, so the
    /// Vandermonde factor is not invertible and the model is unidentifiable.
    #[error("degeneracy: {0}")]
    Degeneracy(String),

    /// Numerical rank fell below what the recovery step requires.
    #[error("conditioning failure: {0}")]
    Conditioning(String),

    /// An eigenvalue strayed too far off the real axis.
    #[error("non-real eigenvalue: {0}")]
    NonRealEigenvalue(String),

    /// A pipeline stage failed; wraps the inner error with a stage label.
    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 3 for numerical failures, 4 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse { .. } | Error::Json(_) => 4,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
