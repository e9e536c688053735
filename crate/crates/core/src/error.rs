use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    Parameter(String),
    /// No mechanism parameter satisfies the requested privacy target.
    Calibration {
        reason: String,
        /// Largest ε the calibration route can certify, when one exists.
        max_achievable_eps: Option<f64>,
    },
    /// An input violates a structural precondition (symmetry, orthonormality, ...).
    Contract(String),
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Calibration {
                reason,
                max_achievable_eps: Some(eps),
            } => write!(f, "calibration infeasible: {reason} (max achievable eps = {eps})"),
            Error::Calibration { reason, .. } => write!(f, "calibration infeasible: {reason}"),
            Error::Contract(msg) => write!(f, "contract violation: {msg}"),
            Error::Shape { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
        }
    }
}

impl core::error::Error for Error {}
