use std::fmt;

use nicr_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_NOT_CONVERGED: u8 = 5;

/// A command failure with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: String) -> Self {
        Self {
            code: EXIT_INPUT,
            message,
        }
    }

    pub fn io(message: String) -> Self {
        Self {
            code: EXIT_IO,
            message,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Degenerate(_) | Error::QuadratureNonConvergence { .. } => EXIT_DEGENERATE,
            Error::Io(_) => EXIT_IO,
            Error::NotConverged => EXIT_NOT_CONVERGED,
            Error::InvalidParam { .. }
            | Error::Domain(_)
            | Error::EmptyInput(_)
            | Error::UnknownStrategy { .. }
            | Error::Parse { .. }
            | Error::MissingColumn(_) => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}
