use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("reference distribution has zero mass at pair {index}")]
    ZeroReferenceMass { index: usize },

    #[error("embedding diverged (non-finite coordinates) at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error(
        "rejection sampler accepted {accepted} of {attempts} draws; acceptance rate below 1e-6"
    )]
    AcceptanceTooLow { accepted: usize, attempts: usize },

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
