use thiserror::Error;

use crate::astro::AstroError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid search domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("population of {n_pop} agents is too small, the index mode needs at least {required}")]
    PopulationTooSmall { n_pop: usize, required: usize },

    #[error("non-finite value passed to {0}")]
    NonFinite(&'static str),

    #[error("{0} requires a non-empty input")]
    Empty(&'static str),

    #[error("unsupported diagnostic: {0}")]
    UnsupportedDiagnostic(String),

    #[error("evaluation budget {budget} is too small: {reason}")]
    BudgetTooSmall { budget: usize, reason: String },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("problem `{0}` has no reference best value")]
    MissingReference(String),

    #[error("point outside the search domain at component {index}: {value}")]
    OutOfBounds { index: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Astro(#[from] AstroError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
