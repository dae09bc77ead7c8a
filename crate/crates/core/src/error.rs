use thiserror::Error;

/// Errors produced by the filtering library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("photon family index must be >= 1 (got 0)")]
    ZeroFamily,

    /// The model has no closed-form filter; use the propagator instead.
    #[error(
        "pulse model `{0}` has no closed-form filter; tabulate it numerically with the propagator"
    )]
    NoClosedForm(&'static str),

    #[error("time {t} lies outside the tabulated window [{start}, {end}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },

    /// The ODE integrator could not meet its tolerances.
    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    /// The recorded outcome has (numerically) zero probability.
    #[error("outcome at step {step} is impossible (step probability {prob:e})")]
    ImpossibleOutcome { step: usize, prob: f64 },

    #[error("Q-parameter is undefined for a distribution with zero mean")]
    UndefinedQ,

    /// A closed-form width equation has no real solution for these inputs.
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::IntegrationFailure { .. }
                | Error::ImpossibleOutcome { .. }
                | Error::UndefinedQ
                | Error::NoSolution(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
