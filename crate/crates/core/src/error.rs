//! Shared error type for the crate.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands live on different qubit counts or incompatible shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An index (qubit, axis, coordinate, ...) is out of range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Text or JSON input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A stabilizer-code invariant is violated.
    #[error("invalid code: {0}")]
    InvalidCode(String),

    /// The requested operation needs a code with logical qubits (k >= 1).
    #[error("code has no logical qubits")]
    NoLogicals,

    /// Problem size exceeds a hard capacity cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Construction parameters are invalid for the requested family.
    #[error("invalid lattice parameters: {0}")]
    InvalidLattice(String),

    /// The operation requires a CSS code (every generator pure-X or pure-Z).
    #[error("not a CSS code: {0}")]
    NotCss(String),

    /// A runtime configuration value (temperature, bias, chain count, ...) is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Underlying JSON failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
