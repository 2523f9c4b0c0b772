use alloc::format;
use alloc::string::String;

/// Every fallible operation of the core reports one of these.
///
/// Variants are grouped by the category the command-line front end maps to an
/// exit code: configuration, physics/data, and numerical failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("{quantity} = {value} outside supported range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("energy below straggling model validity: {element} at {energy_mev} MeV")]
    StragglingValidity {
        element: &'static str,
        energy_mev: f64,
    },
    #[error("invalid data table: {0}")]
    Table(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Coarse category used for exit codes and log prefixes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::Shape(_) => ErrorCategory::Config,
            Error::OutOfRange { .. } | Error::StragglingValidity { .. } | Error::Table(_) => {
                ErrorCategory::Physics
            }
            Error::Numerical(_) => ErrorCategory::Numerical,
        }
    }

    /// Prefixes the message with `context` (variants with structured fields are kept as is).
    pub fn with_context(self, context: &str) -> Self {
        match self {
            Error::Config(m) => Error::Config(format!("{context}: {m}")),
            Error::Shape(m) => Error::Shape(format!("{context}: {m}")),
            Error::Table(m) => Error::Table(format!("{context}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{context}: {m}")),
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Physics,
    Numerical,
}
