//! Error types shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories; the CLI maps each variant to a distinct exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violated a precondition (bad range, non-monotone table,
    /// degenerate distribution, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// An input file could not be parsed; names the offending location.
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Structurally inconsistent inputs (index out of range, length
    /// mismatch, corrupt header, ...).
    #[error("structural error: {0}")]
    Structural(String),

    /// A design target cannot be met; reports the achievable interval.
    #[error("infeasible design: {message} (achievable [{lo}, {hi}])")]
    Infeasible { message: String, lo: f64, hi: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
