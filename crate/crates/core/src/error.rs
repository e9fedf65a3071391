use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric argument is out of its domain (non-finite, non-positive, ...).
    InvalidParameter(String),
    /// The phase rate is undefined because the tag sits on the reader.
    Singularity,
    /// Two drones start closer than the minimum allowed spacing.
    Formation {
        first: String,
        second: String,
        spacing: f64,
        minimum: f64,
    },
    /// No samples exist for the requested tag.
    EmptyTrace { tag_id: String },
    /// A trace is too short for the requested operation.
    InsufficientData { needed: usize, got: usize },
    /// A metric has no defined value for the given input (e.g. fewer than two drones).
    UndefinedMetric(String),
    /// The recordings handed to the locator disagree about the swarm.
    InconsistentRecordings(String),
    /// An experiment configuration failed validation.
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Singularity => write!(f, "tag coincides with the reader; phase rate undefined"),
            Error::Formation {
                first,
                second,
                spacing,
                minimum,
            } => write!(
                f,
                "drones {first} and {second} are {spacing:.4} m apart, below the {minimum:.4} m minimum"
            ),
            Error::EmptyTrace { tag_id } => write!(f, "no samples for tag {tag_id}"),
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} samples, got {got}")
            }
            Error::UndefinedMetric(msg) => write!(f, "metric undefined: {msg}"),
            Error::InconsistentRecordings(msg) => write!(f, "inconsistent recordings: {msg}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
