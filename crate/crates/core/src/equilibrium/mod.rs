//! Market clearing, buyer indifference and equilibrium enumeration.
//!
//! A non-discriminatory equilibrium is an intersection of the market
//! clearing curve `λ_B^MC(λ_G)` with the buyer indifference curve
//! `λ_B^BI(λ_G)`. Discriminatory equilibria pair two distinct `G` queues
//! that give the same payoff as a common `B` queue; see [`discriminatory`].

mod discriminatory;
mod nondiscriminatory;

pub use discriminatory::{
    branch_triple, discriminatory_q_interval, enumerate_discriminatory, BranchBand, BranchTriple,
    DiscriminatoryMap, QInterval, BRANCH_PAIRS,
};
pub use nondiscriminatory::{solve_nondiscriminatory, NonDiscriminatorySolver};

use crate::error::{Error, Result};
use crate::mechanics::{self, seller_match_rate, steady_state_or_convention, u_b, u_g};
use crate::model::{MarketParams, QueuePair};
use crate::roots::{bisect, expand_bracket};
use crate::tol::{LAMBDA_CAP, LAMBDA_FLOOR, LAMBDA_MAX, LAMBDA_MIN};

/// No buyer searches when average quality does not cover the price.
pub fn no_trade(params: &MarketParams) -> bool {
    !mechanics::trade_regime(params)
}

/// Buyers needed to sustain `queues` for a seller population of mass
/// `seller_mass`, evaluated on its steady-state masses.
pub fn required_buyer_mass(queues: QueuePair, params: &MarketParams, seller_mass: f64) -> Result<f64> {
    let s = steady_state_or_convention(queues, params, seller_mass)?;
    Ok(queues.lambda_g * s.g_mass() + queues.lambda_b * s.b_mass())
}

/// Market-clearing buyer mass for a unit seller population, written out
/// directly in terms of the matching rates.
pub fn clearing_mass(lambda_g: f64, lambda_b: f64, params: &MarketParams) -> f64 {
    let k = params.k();
    let (d, a) = (params.delta(), params.alpha());
    let psi_g = seller_match_rate(lambda_g, k);
    let psi_b = seller_match_rate(lambda_b, k);
    let denom = 2.0 * (d * psi_g + d * psi_b + a * psi_g * psi_b);
    if denom == 0.0 {
        return 0.0;
    }
    (lambda_g * psi_b * (2.0 * d + a * psi_g) + lambda_b * psi_g * (2.0 * d + a * psi_b)) / denom
}

/// The `λ_B` that clears the market for buyer mass `buyer_mass` given
/// `lambda_g`.
pub fn mc_curve(lambda_g: f64, buyer_mass: f64, params: &MarketParams, seller_mass: f64) -> Result<f64> {
    if !(lambda_g > 0.0 && buyer_mass > 0.0 && seller_mass > 0.0) {
        return Err(Error::InvalidArgument(
            "mc_curve needs positive lambda_g, buyer mass and seller mass".into(),
        ));
    }
    let f = |lb: f64| seller_mass * clearing_mass(lambda_g, lb, params) - buyer_mass;
    let (lo, hi) = expand_bracket(
        f,
        LAMBDA_MIN,
        LAMBDA_MAX,
        LAMBDA_MIN,
        LAMBDA_CAP,
        "market clearing",
    )?;
    bisect(f, lo, hi)
}

/// The `λ_B` that gives buyers the same payoff as `G` queue `lambda_g`.
pub fn bi_curve(lambda_g: f64, params: &MarketParams) -> Result<f64> {
    if lambda_g <= 0.0 {
        return Err(Error::DegenerateQueue);
    }
    if no_trade(params) {
        return Err(Error::InvalidRegime("(u_high + u_low)/2 <= price"));
    }
    lambda_b_for_payoff(u_g(lambda_g, params), params)
}

/// Inverts the strictly decreasing positive part of `u_B`.
pub(crate) fn lambda_b_for_payoff(target: f64, params: &MarketParams) -> Result<f64> {
    let f = |lb: f64| u_b(lb, params) - target;
    let (lo, hi) = expand_bracket(
        f,
        LAMBDA_MIN,
        LAMBDA_MAX,
        LAMBDA_FLOOR,
        LAMBDA_CAP,
        "buyer indifference",
    )?;
    bisect(f, lo, hi)
}

/// Change of variables `λ' = λ β^(1/k)` that maps a market with rating
/// quality `β` onto one with `β = 1`.
pub fn rescale_queue(lambda: f64, beta: f64, k: f64) -> f64 {
    lambda * beta.powf(1.0 / k)
}

/// Range of rating qualities `(β̲, β̄)` that support a discriminatory
/// equilibrium at the given buyer mass, holding everything else fixed.
pub fn beta_interval(params: &MarketParams) -> Result<Option<(f64, f64)>> {
    let q = params.buyer_mass();
    if q <= 0.0 {
        return Ok(None);
    }
    let normalized = params.with_rates(1.0, 1.0)?;
    Ok(discriminatory_q_interval(&normalized)?.map(|iv| {
        let k = params.k();
        ((iv.lower / q).powf(k), (iv.upper / q).powf(k))
    }))
}
