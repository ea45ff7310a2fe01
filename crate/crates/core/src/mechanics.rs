//! Matching technology, steady-state seller distribution, beliefs and
//! buyer payoffs.
//!
//! All payoff functions are written in terms of the seller matching rate
//! `ψ = λ^k`. The steady state of the rating process has a closed form in
//! which the share of high types within a rating depends only on that
//! rating's own matching rate, which is what makes the buyer payoff of each
//! submarket a function of a single queue ratio.

use crate::error::{Error, Result};
use crate::model::{Beliefs, MarketParams, QueuePair, Rating, SteadyState};

/// Seller matching rate `ψ(λ) = λ^k`.
pub fn seller_match_rate(lambda: f64, k: f64) -> f64 {
    if lambda <= 0.0 {
        0.0
    } else {
        lambda.powf(k)
    }
}

/// Buyer matching rate `φ(λ) = ψ(λ)/λ = λ^(k-1)`.
pub fn buyer_match_rate(lambda: f64, k: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::DegenerateQueue);
    }
    Ok(lambda.powf(k - 1.0))
}

/// Closed-form steady state for one seller population of mass
/// `seller_mass` facing the given queues.
///
/// When neither rating trades every split is stationary; the error then
/// carries the convention state with a quarter of the mass in each cell.
pub fn steady_state(queues: QueuePair, params: &MarketParams, seller_mass: f64) -> Result<SteadyState> {
    queues.check()?;
    if !(seller_mass > 0.0 && seller_mass.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "seller mass must be positive, got {seller_mass}"
        )));
    }
    let k = params.k();
    let (d, a) = (params.delta(), params.alpha());
    let psi_g = seller_match_rate(queues.lambda_g, k);
    let psi_b = seller_match_rate(queues.lambda_b, k);
    let denom = 2.0 * (d * (psi_g + psi_b) + a * psi_g * psi_b);
    if denom == 0.0 {
        let q = 0.25 * seller_mass;
        return Err(Error::Indeterminate {
            convention: SteadyState::from_array([q; 4], seller_mass),
        });
    }
    let s = seller_mass / denom;
    Ok(SteadyState {
        p_hg: s * psi_b * (d + psi_g * a),
        p_lg: s * psi_b * d,
        p_hb: s * psi_g * d,
        p_lb: s * psi_g * (d + psi_b * a),
        seller_mass,
    })
}

/// Like [`steady_state`], but maps the indeterminate case to its convention
/// state.
pub fn steady_state_or_convention(
    queues: QueuePair,
    params: &MarketParams,
    seller_mass: f64,
) -> Result<SteadyState> {
    match steady_state(queues, params, seller_mass) {
        Err(Error::Indeterminate { convention }) => Ok(convention),
        other => other,
    }
}

/// Net inflow into each of `(HG, LG, HB, LB)`; zero at a steady state.
pub fn flow_residuals(state: &SteadyState, queues: QueuePair, params: &MarketParams) -> [f64; 4] {
    let k = params.k();
    let (d, a) = (params.delta(), params.alpha());
    let corr_g = a * seller_match_rate(queues.lambda_g, k);
    let corr_b = a * seller_match_rate(queues.lambda_b, k);
    let [hg, lg, hb, lb] = state.as_array();
    [
        lg * d + hb * corr_b - hg * d,
        hg * d - lg * (d + corr_g),
        lb * d - hb * (d + corr_b),
        hb * d + lg * corr_g - lb * d,
    ]
}

/// `μ_G(λ_G)`, the high-type share among `G`-rated sellers.
pub fn mu_g(lambda_g: f64, params: &MarketParams) -> f64 {
    let d = params.delta();
    1.0 - d / (2.0 * d + seller_match_rate(lambda_g, params.k()) * params.alpha())
}

/// `μ_B(λ_B)`, the high-type share among `B`-rated sellers.
pub fn mu_b(lambda_b: f64, params: &MarketParams) -> f64 {
    let d = params.delta();
    d / (2.0 * d + seller_match_rate(lambda_b, params.k()) * params.alpha())
}

pub fn beliefs(queues: QueuePair, params: &MarketParams) -> Beliefs {
    Beliefs {
        mu_g: mu_g(queues.lambda_g, params),
        mu_b: mu_b(queues.lambda_b, params),
    }
}

/// Expected surplus net of price from a seller who is high type with
/// probability `mu`.
pub fn match_value(mu: f64, params: &MarketParams) -> f64 {
    mu * params.u_high() + (1.0 - mu) * params.u_low() - params.price()
}

/// Flow payoff of a buyer searching among sellers with `rating` at queue
/// ratio `lambda`.
pub fn buyer_payoff(rating: Rating, lambda: f64, params: &MarketParams) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::DegenerateQueue);
    }
    Ok(match rating {
        Rating::G => u_g(lambda, params),
        Rating::B => u_b(lambda, params),
    })
}

/// `u_G(λ)` for `λ > 0`.
pub fn u_g(lambda: f64, params: &MarketParams) -> f64 {
    let psi = lambda.powf(params.k());
    let d = params.delta();
    let bad = (params.u_high() - params.u_low()) * d / (2.0 * d + psi * params.alpha());
    psi / lambda * ((params.u_high() - params.price()) - bad)
}

/// `u_B(λ)` for `λ > 0`.
pub fn u_b(lambda: f64, params: &MarketParams) -> f64 {
    let psi = lambda.powf(params.k());
    let d = params.delta();
    let good = (params.u_high() - params.u_low()) * d / (2.0 * d + psi * params.alpha());
    psi / lambda * (good + params.u_low() - params.price())
}

/// Central-difference slope of `u_G`.
pub fn u_g_slope(lambda: f64, params: &MarketParams) -> f64 {
    let h = crate::tol::slope_step(lambda).min(0.5 * lambda);
    (u_g(lambda + h, params) - u_g(lambda - h, params)) / (2.0 * h)
}

/// Participation threshold `μ̲ = (p - u_L)/(u_H - u_L)`; a rating attracts
/// buyers only if its belief exceeds it.
pub fn mu_threshold(params: &MarketParams) -> f64 {
    (params.price() - params.u_low()) / (params.u_high() - params.u_low())
}

/// True when average quality covers the price, so buyers search.
pub fn trade_regime(params: &MarketParams) -> bool {
    0.5 * (params.u_high() + params.u_low()) > params.price()
}

fn require_trade(params: &MarketParams) -> Result<()> {
    if trade_regime(params) {
        Ok(())
    } else {
        Err(Error::InvalidRegime("(u_high + u_low)/2 <= price"))
    }
}

/// Elasticity threshold `k̲`: `u_G` is globally decreasing iff `k <= k̲`.
pub fn k_threshold(params: &MarketParams) -> Result<f64> {
    require_trade(params)?;
    let (uh, ul, p) = (params.u_high(), params.u_low(), params.price());
    let radicand = 1.0 - (uh - ul) / (2.0 * (uh - p));
    Ok(0.5 * (1.0 + radicand.max(0.0).sqrt()))
}

/// Coefficients `(a, b, c)` of `h(ψ) = aψ² + bψ + c`, which has the sign of
/// `du_G/dλ` at `ψ = λ^k`.
pub fn h_coefficients(params: &MarketParams) -> [f64; 3] {
    let one_k = 1.0 - params.k();
    let (uh, ul, p) = (params.u_high(), params.u_low(), params.price());
    let (d, a) = (params.delta(), params.alpha());
    [
        -one_k * a * a * (uh - p),
        (uh - ul - 4.0 * one_k * (uh - p)) * d * a,
        -2.0 * one_k * d * d * (uh + ul - 2.0 * p),
    ]
}

pub fn h_quadratic(psi: f64, params: &MarketParams) -> f64 {
    let [a, b, c] = h_coefficients(params);
    (a * psi + b) * psi + c
}

/// Maximum of `h` over `ψ >= 0` and where it is attained.
pub fn h_max(params: &MarketParams) -> (f64, f64) {
    let [a, b, _] = h_coefficients(params);
    let psi = (-b / (2.0 * a)).max(0.0);
    (psi, h_quadratic(psi, params))
}

/// The interval `(λ̲_G, λ̄_G)` on which `u_G` increases, or `None` when
/// `u_G` is monotone.
pub fn ug_increasing_interval(params: &MarketParams) -> Result<Option<(f64, f64)>> {
    let k_bar = k_threshold(params)?;
    if params.k() <= k_bar {
        return Ok(None);
    }
    let [a, b, c] = h_coefficients(params);
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 || b <= 0.0 {
        return Ok(None);
    }
    // a < 0 < b and c < 0: both roots positive. Avoid cancellation.
    let q = -0.5 * (b + disc.sqrt());
    let (r1, r2) = (q / a, c / q);
    let (psi_lo, psi_hi) = (r1.min(r2), r1.max(r2));
    let inv_k = 1.0 / params.k();
    Ok(Some((psi_lo.powf(inv_k), psi_hi.powf(inv_k))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RawParams;

    fn params(delta: f64, alpha: f64, uh: f64, ul: f64, p: f64, k: f64) -> MarketParams {
        MarketParams::new(RawParams {
            delta,
            alpha,
            u_high: uh,
            u_low: ul,
            price: p,
            k,
            buyer_mass: 1.0,
        })
        .unwrap()
    }

    fn fig1(k: f64) -> MarketParams {
        params(0.1, 0.1, 2.0, 1.0, 1.0, k)
    }

    fn fig3() -> MarketParams {
        params(0.2, 0.5, 3.0, 1.0, 1.5, 0.8204)
    }

    #[test]
    fn matching_rates() {
        assert_eq!(seller_match_rate(0.0, 0.5), 0.0);
        assert_eq!(seller_match_rate(1.0, 0.37), 1.0);
        assert_eq!(seller_match_rate(4.0, 0.5), 2.0);
        assert_eq!(buyer_match_rate(1.0, 0.7).unwrap(), 1.0);
        assert_eq!(buyer_match_rate(4.0, 0.5).unwrap(), 0.5);
        assert_eq!(buyer_match_rate(0.0, 0.5), Err(Error::DegenerateQueue));
    }

    #[test]
    fn steady_state_at_unit_matching() {
        // δ = α = 0.1 and ψ_G = ψ_B = 1: denominator 2(0.2 + 0.1) = 0.6.
        let s = steady_state(QueuePair::new(1.0, 1.0).unwrap(), &fig1(0.8), 1.0).unwrap();
        let expect = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0];
        for (got, want) in s.as_array().iter().zip(expect) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn steady_state_without_b_trade() {
        let s = steady_state(QueuePair::new(2.0, 0.0).unwrap(), &fig1(0.8), 1.0).unwrap();
        assert_eq!(s.as_array(), [0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn steady_state_without_any_trade_is_indeterminate() {
        let p = fig1(0.8);
        match steady_state(QueuePair::ZERO, &p, 1.0) {
            Err(Error::Indeterminate { convention }) => {
                assert_eq!(convention.as_array(), [0.25; 4]);
                let b = convention.empirical_beliefs();
                assert_eq!((b.mu_g, b.mu_b), (0.5, 0.5));
            }
            other => panic!("unexpected {other:?}"),
        }
        let b = beliefs(QueuePair::ZERO, &p);
        assert_eq!((b.mu_g, b.mu_b), (0.5, 0.5));
    }

    #[test]
    fn steady_state_scales_with_mass() {
        let p = fig3();
        let q = QueuePair::new(1.0, 0.5).unwrap();
        let one = steady_state(q, &p, 1.0).unwrap();
        let half = steady_state(q, &p, 0.5).unwrap();
        for (a, b) in one.as_array().iter().zip(half.as_array()) {
            assert!((0.5 * a - b).abs() < 1e-16);
        }
        assert!(half.is_consistent());
    }

    #[test]
    fn residuals_vanish_and_sum_to_zero() {
        let p = fig3();
        let q = QueuePair::new(1.3, 0.4).unwrap();
        let s = steady_state(q, &p, 1.0).unwrap();
        let r = flow_residuals(&s, q, &p);
        assert!(r.iter().all(|x| x.abs() < 1e-12));
        let eps = 1e-3;
        let mut bumped = s;
        bumped.p_hg += eps;
        let r = flow_residuals(&bumped, q, &p);
        assert!((r[0] + eps * p.delta()).abs() < 1e-15);
        assert!(r.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn beliefs_match_masses() {
        let p = fig1(0.8);
        let q = QueuePair::new(1.0, 1.0).unwrap();
        let b = beliefs(q, &p);
        assert!((b.mu_g - 2.0 / 3.0).abs() < 1e-15);
        let s = steady_state(q, &p, 1.0).unwrap();
        assert!((s.p_hg / s.g_mass() - b.mu_g).abs() < 1e-15);
        assert_eq!(mu_g(0.0, &p), 0.5);
        assert!(mu_b(1e12, &p) < 1e-8);
    }

    #[test]
    fn payoff_with_uninformative_beliefs() {
        // μ → 1/2 as λ → 0, so the bracket tends to (u_H + u_L)/2 - p.
        let p = params(0.1, 0.1, 3.0, 1.0, 1.5, 0.8);
        let lam = 1e-14;
        let factor = u_g(lam, &p) / buyer_match_rate(lam, p.k()).unwrap();
        assert!((factor - 0.5).abs() < 1e-9);
        assert_eq!(buyer_payoff(Rating::B, 0.0, &p), Err(Error::DegenerateQueue));
    }

    #[test]
    fn thresholds() {
        let p = params(0.1, 0.1, 2.0, 1.0, 1.0, 0.8);
        assert_eq!(mu_threshold(&p), 0.0);
        assert!((mu_threshold(&params(0.1, 0.1, 3.0, 1.0, 1.5, 0.8)) - 0.25).abs() < 1e-15);
        assert_eq!(mu_threshold(&params(0.1, 0.1, 2.0, 1.5, 1.0, 0.8)), -1.0);
        assert!((k_threshold(&p).unwrap() - 0.8536).abs() < 1e-4);
        assert!((k_threshold(&fig3()).unwrap() - 0.7887).abs() < 1e-4);
        let near = params(0.1, 0.1, 2.0, 2.0 - 1e-9, 1.0, 0.8);
        assert!((k_threshold(&near).unwrap() - 1.0).abs() < 1e-9);
        let no_trade = params(0.1, 0.1, 2.0, 1.0, 1.5, 0.8);
        assert!(matches!(k_threshold(&no_trade), Err(Error::InvalidRegime(_))));
    }

    #[test]
    fn h_is_negative_at_zero_and_tangent_at_threshold() {
        let p = fig1(0.8);
        assert!(h_quadratic(0.0, &p) < 0.0);
        let kb = k_threshold(&p).unwrap();
        let at = p.with_k(kb).unwrap();
        let (psi, hmax) = h_max(&at);
        assert!(psi > 0.0);
        assert!(hmax.abs() < 1e-9, "{hmax}");
    }

    #[test]
    fn increasing_interval_for_figure_one() {
        assert_eq!(ug_increasing_interval(&fig1(0.7682)).unwrap(), None);
        let (lo, hi) = ug_increasing_interval(&fig1(0.8828)).unwrap().unwrap();
        assert!(
            (lo - 0.4513).abs() < 1e-3 && (hi - 4.859).abs() < 1e-2,
            "{lo} {hi}"
        );
        let p = fig1(0.8828);
        assert!(u_g_slope(lo * 0.99, &p) < 0.0 && u_g_slope(lo * 1.01, &p) > 0.0);
        assert!(u_g_slope(hi * 0.99, &p) > 0.0 && u_g_slope(hi * 1.01, &p) < 0.0);
    }

    #[test]
    fn interval_collapses_at_threshold() {
        let p = fig1(0.8);
        let kb = k_threshold(&p).unwrap();
        let (lo, hi) = ug_increasing_interval(&p.with_k(kb + 1e-9).unwrap())
            .unwrap()
            .unwrap();
        let psi_star = h_max(&p.with_k(kb).unwrap()).0;
        let lam_star = psi_star.powf(1.0 / kb);
        assert!(lo < lam_star && lam_star < hi);
        assert!((hi - lo) / lam_star < 1e-2, "{lo} {hi}");
    }
}
