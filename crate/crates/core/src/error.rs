use alloc::string::String;
use core::fmt;

/// Errors raised by the pure computations of this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two vectors that must share a dimension do not.
    DimensionMismatch { left: usize, right: usize },
    /// A real input was negative, NaN or infinite where that is not allowed.
    InvalidValue { what: &'static str, value: f64 },
    /// A collection that must be non-empty was empty.
    Empty(&'static str),
    /// A score set lacks genuine or impostor trials.
    MissingClass { genuine: usize, impostor: usize },
    /// The same trial key appeared twice.
    DuplicateKey(String),
    /// A value is statistically undefined for the given input.
    Undefined(&'static str),
    /// A domain invariant does not hold.
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::InvalidValue { what, value } => write!(f, "invalid {what}: {value}"),
            Error::Empty(what) => write!(f, "{what} must not be empty"),
            Error::MissingClass { genuine, impostor } => write!(
                f,
                "score set needs at least one genuine and one impostor trial \
                 (got {genuine} genuine, {impostor} impostor)"
            ),
            Error::DuplicateKey(key) => write!(f, "duplicate trial key {key}"),
            Error::Undefined(what) => write!(f, "{what} is undefined for this input"),
            Error::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
