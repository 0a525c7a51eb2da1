use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by model evaluation, path generation and integration.
///
/// Errors that happen while stepping carry the time index of the step so a
/// stiff blow-up can be located after the fact.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("state {state} is outside the domain of model `{model}`{}", StepSuffix(*step))]
    Domain {
        model: String,
        state: f64,
        step: Option<usize>,
    },

    #[error("not a stationary point at c = {c}: f(c) = {drift}, g(c) = {diffusion}")]
    NotStationary { c: f64, drift: f64, diffusion: f64 },

    #[error("stiffness-reducing transformation needs f'(c) < 0, got {0}")]
    UnsupportedRate(f64),

    #[error("fixed-point iteration produced a non-finite iterate{} (last finite state {state}, residual {residual})", StepSuffix(*step))]
    Divergence {
        state: f64,
        residual: f64,
        step: Option<usize>,
    },

    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("Lyapunov estimator undefined for final state {0}")]
    EstimatorUndefined(f64),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Attach a time index to a stepping error that does not carry one yet.
    pub fn at_step(self, index: usize) -> Self {
        match self {
            Error::Domain {
                model,
                state,
                step: None,
            } => Error::Domain {
                model,
                state,
                step: Some(index),
            },
            Error::Divergence {
                state,
                residual,
                step: None,
            } => Error::Divergence {
                state,
                residual,
                step: Some(index),
            },
            other => other,
        }
    }

    /// Time index carried by a stepping error, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            Error::Domain { step, .. } | Error::Divergence { step, .. } => *step,
            _ => None,
        }
    }
}

struct StepSuffix(Option<usize>);

impl fmt::Display for StepSuffix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(n) => write!(f, " at step {n}"),
            None => Ok(()),
        }
    }
}
