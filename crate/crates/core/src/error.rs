use thiserror::Error;

use crate::patchwork::CellCopulaKind;

/// Errors raised while building or evaluating copulas.
#[derive(Debug, Error)]
pub enum CopulaError {
    #[error("argument {value} lies outside the open unit interval")]
    Domain { value: f64 },

    #[error("index {index} is outside the support of a Bernstein family with a = {a}")]
    Index { index: u64, a: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("column {column} contains the tied value {value}")]
    Ties { column: usize, value: f64 },

    #[error("invalid rank data: {0}")]
    InvalidRanks(String),

    #[error("the {kind} cell copula is singular and has no density")]
    Singular { kind: CellCopulaKind },

    #[error("lower Fréchet cells require exactly 2 dimensions, got {dim}")]
    LowerFrechetDimension { dim: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("probability table would hold about {estimate} entries (budget {budget}); lower max_index or raise the truncation tolerance")]
    TableTooLarge { estimate: u128, budget: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CopulaError>;
