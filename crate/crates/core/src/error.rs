use thiserror::Error;

/// Errors raised by the algebra kernel, the series engine and the diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("variable universes differ: {left} vs {right}")]
    VariableMismatch { left: String, right: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` is not bound at the evaluation point")]
    UnboundVariable(String),

    #[error("{what}: index {index} out of range (length {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("order {order}: {terms} terms exceed the cap of {cap}")]
    TermCap {
        order: usize,
        terms: usize,
        cap: usize,
    },

    #[error("order {order}, component {component}: boundary condition violated at the terminal time")]
    Boundary { order: usize, component: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
