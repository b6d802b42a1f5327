use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {value} for key {key} is outside [0, 1]")]
    ProbabilityOutOfRange { key: usize, value: f64 },
    #[error("distribution sums to {sum}, expected 1")]
    NotStochastic { sum: f64 },
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("state index {0} out of range")]
    UnknownState(usize),
    #[error("parameter index {0} out of range")]
    UnknownParameter(usize),
    #[error("parameter {0} has an empty domain")]
    EmptyDomain(usize),
    #[error("state {state} has no transition template")]
    MissingTemplate { state: usize },
    #[error("invalid realization: {0}")]
    InvalidRealization(String),
    #[error("invalid subfamily: {0}")]
    InvalidSubfamily(String),
    #[error("target set is empty")]
    EmptyTarget,
    #[error("threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("relaxation factor {0} is outside [0, 1)")]
    RelaxationOutOfRange(f64),
    #[error("state {0} has no actions")]
    NoActions(usize),
    #[error("value iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("exact solver supports at most {limit} states, got {states}")]
    TooManyStates { states: usize, limit: usize },
    #[error("state {state} would have {actions} quotient actions (limit {limit})")]
    ActionCap { state: usize, actions: u128, limit: u128 },
    #[error("family has {members} members, above the enumeration cap of {cap}")]
    MemberCap { members: u128, cap: u128 },
    #[error("rerouting value {value} for state {state} is outside [0, 1]")]
    GammaOutOfRange { state: usize, value: f64 },
    #[error("horizon emptied before a violation was exhibited; the rerouting bounds are inconsistent")]
    InvalidBounds,
    #[error("optimal synthesis needs a min or max objective")]
    MissingObjective,
    #[error("member satisfies the property; no counterexample exists")]
    NotViolating,
    #[error("horizon is empty")]
    EmptyHorizon,
    #[error("cannot split a subfamily with a single member")]
    SingletonSplit,
    #[error("instance exceeds the exhaustive oracle limits: {0}")]
    OracleLimit(String),
    #[error("benchmark parameters infeasible: {0}")]
    BenchmarkParameters(String),
    #[error("{location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Errors caused by hitting a configured size or iteration cap rather than by bad input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_)
                | Error::TooManyStates { .. }
                | Error::ActionCap { .. }
                | Error::MemberCap { .. }
                | Error::OracleLimit(_)
        )
    }
}
