use thiserror::Error;

/// Errors produced by the analytic, numerical and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model or setup parameter violates its constraint.
    #[error("{0}")]
    InvalidParam(String),

    /// An operation that needs a stationary state was called with a zero exit rate.
    #[error("no stationary state: exit rate lambda_m must be positive")]
    NoStationaryState,

    /// Adaptive quadrature ran out of subdivision depth before meeting its tolerance.
    #[error("quadrature did not converge: worst panel [{a}, {b}] has error estimate {error:e}")]
    QuadratureDepth { a: f64, b: f64, error: f64 },

    /// Quadrature failure while evaluating a density at a specific abscissa.
    #[error("quadrature failed at x = {x}: {source}")]
    QuadratureAt {
        x: f64,
        #[source]
        source: Box<Error>,
    },

    /// Root finding was given an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A simulation exceeded its event budget.
    #[error("event budget of {budget} exceeded at t = {time}")]
    EventBudget { budget: u64, time: f64 },

    /// An estimator was handed no samples.
    #[error("empty sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParam(msg.into()))
}
