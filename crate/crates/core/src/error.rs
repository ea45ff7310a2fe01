use thiserror::Error;

use crate::model::SteadyState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter record failed validation; `name` identifies the bound.
    #[error("parameter violates bound `{name}`")]
    ViolatedBound { name: &'static str },

    /// The buyer matching rate `φ(0)` is infinite.
    #[error("queue ratio is zero; buyer matching rate diverges")]
    DegenerateQueue,

    /// Neither rating trades, so any seller split is stationary. The
    /// conventional state is attached.
    #[error("no trade in either submarket; steady state is indeterminate")]
    Indeterminate { convention: SteadyState },

    #[error("invalid regime: {0}")]
    InvalidRegime(&'static str),

    #[error("could not bracket root of {what} within [{lower:e}, {upper:e}]")]
    BracketFailure {
        what: &'static str,
        lower: f64,
        upper: f64,
    },

    #[error("lambda_b = {lambda_b} lies outside the branch band [{lower}, {upper}]")]
    OutOfBand { lambda_b: f64, lower: f64, upper: f64 },

    /// The reduced payoff `U` is only defined when the non-discriminatory
    /// equilibrium is unique.
    #[error("{count} non-discriminatory equilibria at buyer mass {buyer_mass}; U(q) is undefined")]
    MultipleEquilibria { buyer_mass: f64, count: usize },

    #[error("no non-discriminatory equilibrium found at buyer mass {buyer_mass}")]
    NoEquilibrium { buyer_mass: f64 },

    #[error("negative seller mass after {retries} step halvings (last step {step:e})")]
    StepTooLarge { step: f64, retries: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
