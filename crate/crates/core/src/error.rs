use thiserror::Error;

use crate::model::{PackageId, ValidationErrors};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationErrors),
    #[error("package {id} is not available{}", epoch.map(|h| format!(" in epoch {h}")).unwrap_or_default())]
    UnknownPackageId { id: PackageId, epoch: Option<usize> },
    #[error("package {id} appears more than once in one epoch plan")]
    RepeatedPackage { id: PackageId },
    #[error("horizon mismatch: {0}")]
    HorizonMismatch(String),
    #[error("epoch plan is empty")]
    EmptyPlan,
    #[error("instance has an infinite horizon; use the infinite-horizon solver")]
    InfiniteHorizon,
    #[error("instance has a finite horizon; use the finite-horizon solver")]
    FiniteHorizon,
    #[error("instance has no per-epoch package catalogs")]
    MissingPerEpochCatalog,
    #[error("{count} packages exceeds the limit of {max}")]
    TooManyPackages { count: usize, max: usize },
    #[error("{count} trials exceeds the limit of {max}")]
    TooManyTrials { count: usize, max: usize },
    #[error("search space of {size} plans exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },
    #[error("scale limit exceeded: {0}")]
    ScaleLimitExceeded(String),
    #[error("value is unbounded: a riskless plan with positive reward repeats forever")]
    UnboundedValue,
    #[error("cannot simulate a riskless non-empty stationary plan")]
    UnboundedSimulation,
    #[error("tours overlap on package {id}")]
    OverlappingTours { id: PackageId },
    #[error("package {id} is already assigned")]
    AlreadyAssigned { id: PackageId },
    #[error("quotient difference is undefined when the two survival probabilities are equal")]
    DegenerateQuotient,
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("value iteration did not converge after {iterations} sweeps")]
    NotConverged { iterations: usize },
}

impl Error {
    /// True for errors caused by a request that exceeds a documented size
    /// limit rather than by malformed input.
    pub fn is_scale_limit(&self) -> bool {
        matches!(
            self,
            Error::TooManyPackages { .. }
                | Error::TooManyTrials { .. }
                | Error::SearchSpaceTooLarge { .. }
                | Error::ScaleLimitExceeded(_)
        )
    }
}

impl From<ValidationErrors> for Error {
    fn from(errors: ValidationErrors) -> Self {
        Error::InvalidInstance(errors)
    }
}
