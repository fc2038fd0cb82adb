use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("subshift is empty after pruning")]
    EmptySubshift,

    #[error("resource limit: {what} needs about {needed:.3e} units, budget is {budget}")]
    ResourceLimit {
        what: &'static str,
        needed: f64,
        budget: u64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("sequence too short: need {needed} terms, got {got}")]
    InsufficientLength { needed: usize, got: usize },

    #[error("degenerate scale: eps = {eps} is not above 4 x truncation error {truncation}")]
    DegenerateScale { eps: f64, truncation: f64 },

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("parameter overflow: {0}")]
    ParameterOverflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }

    pub(crate) fn limit(what: &'static str, needed: f64, budget: u64) -> Self {
        Error::ResourceLimit {
            what,
            needed,
            budget,
        }
    }
}
