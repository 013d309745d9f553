use thiserror::Error;

use crate::specfn::SpecFnError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("shape fit failed: {0}")]
    FitFailure(String),
    #[error("unknown channel condition {requested}; available: {available}")]
    UnknownCondition { requested: String, available: String },
    #[error("term {term}: {source}")]
    Term {
        term: String,
        #[source]
        source: SpecFnError,
    },
    #[error("value {value:e} lies outside [0, 1] beyond numerical slack ({context})")]
    OutOfRange { value: f64, context: String },
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    SpecFn(#[from] SpecFnError),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attaches the name of the failing term to a special-function error.
pub(crate) fn term<T>(name: &str, r: std::result::Result<T, SpecFnError>) -> Result<T> {
    r.map_err(|source| Error::Term {
        term: name.to_string(),
        source,
    })
}
