use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not invertible")]
    NotInvertible,

    #[error("morphism is not square: {0}")]
    NotSquare(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cocycle condition fails on triple ({i},{j},{k})")]
    Cocycle { i: usize, j: usize, k: usize },

    #[error("cohomology did not stabilize for H^{degree} at twist {twist}: window {window} gives {low}, window {next} gives {high}")]
    NotStabilized {
        degree: usize,
        twist: i64,
        window: i64,
        next: i64,
        low: String,
        high: String,
    },

    #[error("table is not a sum of line bundles: residual {residual} at twist {twist}")]
    NegativeResidual { twist: i64, residual: i64 },

    #[error("long exact sequence constraints are inconsistent: {0}")]
    Inconsistent(String),

    #[error("reduced bundle does not match the split model: {0}")]
    ReducedMismatch(String),
}
