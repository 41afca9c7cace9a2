use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The instance file could not be parsed at all.
    #[error("syntax error: {0}")]
    Syntax(String),

    /// The instance parsed but violates an invariant. `field` names the offending field.
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("channel {channel} is not in the common set of SU {su}")]
    ChannelNotShared { su: usize, channel: usize },

    #[error("channel {channel} is already assigned")]
    AlreadyAssigned { channel: usize },

    /// Exhaustive search would visit more than `2^cap` assignments.
    #[error("brute force needs N*M_s = {bits} bits, cap is {cap}")]
    TooLargeForBruteForce { bits: usize, cap: usize },

    /// Exact enumeration scope exceeds the configured state cap.
    #[error("enumeration scope of {states} states exceeds cap {cap}")]
    ScopeTooLarge { states: u128, cap: u64 },

    #[error("inconsistent channel picks: {0}")]
    InconsistentPicks(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No window up to the scan limit meets the collision target.
    #[error("no contention window <= {limit} meets collision target {epsilon} for SU {su}")]
    WindowNotFound { su: usize, epsilon: f64, limit: u32 },

    /// MAC overhead consumes the whole cycle.
    #[error("overhead {0} >= 1: cycle too short for window")]
    OverheadTooLarge(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
