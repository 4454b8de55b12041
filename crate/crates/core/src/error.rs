use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A named input is outside its admissible range.
    #[error("invalid `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    /// A function argument is outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The design has no observable events of interest, so no finite N exists.
    #[error("degenerate design: {0}")]
    Degenerate(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e}) within {segments} segments")]
    QuadratureNonConvergence {
        tol: f64,
        estimate: f64,
        segments: usize,
    },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("fit did not converge")]
    NotConverged,

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("missing column `{0}`")]
    MissingColumn(&'static str),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
