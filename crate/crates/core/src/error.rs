use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set must contain at least one element")]
    EmptyGroundSet,

    #[error("element {element} is out of range for a ground set of size {size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("element {0} is already part of the selection")]
    ElementAlreadySelected(usize),

    #[error("invalid cost {value} for element {element}: costs must be finite and nonnegative")]
    InvalidCost { element: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cannot sample from an empty candidate set")]
    EmptyCandidates,

    #[error("ground set of size {size} exceeds the enumeration limit of {limit}")]
    GroundSetTooLarge { size: usize, limit: usize },

    #[error("performance threshold {threshold} is unreachable (best attainable value {reached})")]
    InfeasibleThreshold { threshold: f64, reached: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("bound is undefined: {0}")]
    UndefinedBound(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("logged selection violates its constraint: {0}")]
    ConstraintViolated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
