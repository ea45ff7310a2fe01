//! Numerical laboratory for a ratings-guided directed-search market.
//!
//! Sellers switch between a high and a low type, carry a public binary
//! rating (`G`/`B`) that is corrected after trades, and are matched with
//! buyers through a Cobb-Douglas technology `ψ(λ) = λ^k`. The crate computes
//! the closed-form steady state of the rating process, buyer payoffs,
//! non-discriminatory and discriminatory equilibria, their existence
//! intervals and a stability classification, and ships an independent flow
//! integrator plus a Monte-Carlo population simulator to cross-check the
//! closed forms.
//!
//! Module map:
//!
//! - [`model`]: parameters, queues, steady states, equilibria.
//! - [`mechanics`]: matching rates, steady state, beliefs, payoffs and the
//!   monotonicity analysis of the `G` payoff.
//! - [`equilibrium`]: market clearing, buyer indifference, equilibrium
//!   enumeration and existence intervals.
//! - [`stability`]: reduced payoff `U(q)` and the stability criterion.
//! - [`dynamics`]: flow ODE integration and stochastic simulation.
//! - [`cli`]: configuration files, reports, sweeps and figure data.

pub mod cli;
pub mod dynamics;
pub mod equilibrium;
mod error;
pub mod mechanics;
pub mod model;
pub mod roots;
pub mod stability;
pub mod tol;

pub use error::{Error, Result};
pub use model::{
    validate_params, Beliefs, Equilibrium, EquilibriumKind, FlowTrajectory, MarketParams, QueuePair,
    QueueQuad, Rating, RawParams, StabilityLabel, SteadyState,
};
