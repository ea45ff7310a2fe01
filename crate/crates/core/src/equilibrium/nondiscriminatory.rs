use rayon::prelude::*;

use super::{bi_curve, clearing_mass, no_trade};
use crate::error::Result;
use crate::mechanics::u_g;
use crate::model::{Equilibrium, EquilibriumKind, MarketParams, QueuePair, QueueQuad, StabilityLabel};
use crate::roots::{grid_roots, log_grid};
use crate::tol::{CURVE_GRID, DEDUP_TOL, LAMBDA_MAX, LAMBDA_MIN};

/// Solves the non-discriminatory problem for any buyer mass.
///
/// The indifference curve does not depend on the buyer mass, so it is
/// tabulated once on a log grid together with the buyer mass it clears.
/// Since clearing is increasing in `λ_B`, the sign of
/// `clearing(λ_G, λ_B^BI(λ_G)) - Q` is the sign of `λ_B^BI - λ_B^MC`,
/// and intersections are the roots of that difference along the grid.
#[derive(Debug, Clone)]
pub struct NonDiscriminatorySolver {
    params: MarketParams,
    lambda_g: Vec<f64>,
    lambda_b: Vec<f64>,
    clearing: Vec<f64>,
}

impl NonDiscriminatorySolver {
    /// Requires the trade regime.
    pub fn new(params: &MarketParams) -> Result<Self> {
        let lambda_g = log_grid(LAMBDA_MIN, LAMBDA_MAX, CURVE_GRID);
        let lambda_b = lambda_g
            .par_iter()
            .map(|&lg| bi_curve(lg, params))
            .collect::<Result<Vec<f64>>>()?;
        let clearing = lambda_g
            .iter()
            .zip(&lambda_b)
            .map(|(&lg, &lb)| clearing_mass(lg, lb, params))
            .collect();
        Ok(NonDiscriminatorySolver {
            params: *params,
            lambda_g,
            lambda_b,
            clearing,
        })
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    /// Grid of `λ_G` with the tabulated indifference curve and the buyer mass
    /// that clears each point.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.lambda_g
            .iter()
            .zip(&self.lambda_b)
            .zip(&self.clearing)
            .map(|((&g, &b), &c)| (g, b, c))
    }

    /// `λ_G` of every intersection for a unit seller population with
    /// `buyer_mass` buyers, ascending.
    pub fn roots(&self, buyer_mass: f64) -> Vec<f64> {
        let values: Vec<f64> = self.clearing.iter().map(|c| c - buyer_mass).collect();
        let f = |lg: f64| match bi_curve(lg, &self.params) {
            Ok(lb) => clearing_mass(lg, lb, &self.params) - buyer_mass,
            Err(_) => f64::NAN,
        };
        let mut roots = grid_roots(f, &self.lambda_g, &values);
        roots.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL * b.max(1.0));
        roots
    }

    /// Every non-discriminatory equilibrium at `buyer_mass`, sorted by `λ_G`.
    pub fn solve(&self, buyer_mass: f64) -> Result<Vec<Equilibrium>> {
        if buyer_mass <= 0.0 {
            return Ok(vec![Equilibrium::no_trade()]);
        }
        self.roots(buyer_mass)
            .into_iter()
            .map(|lg| {
                let lb = bi_curve(lg, &self.params)?;
                Ok(Equilibrium {
                    kind: EquilibriumKind::NonDiscriminatory,
                    queues: QueueQuad::symmetric(QueuePair {
                        lambda_g: lg,
                        lambda_b: lb,
                    }),
                    buyer_payoff: u_g(lg, &self.params),
                    buyer_split: (0.5 * buyer_mass, 0.5 * buyer_mass),
                    stability: StabilityLabel::NotAssessed,
                })
            })
            .collect()
    }
}

/// All non-discriminatory equilibria at the configured buyer mass, or the
/// single no-trade outcome when buyers do not search.
pub fn solve_nondiscriminatory(params: &MarketParams) -> Result<Vec<Equilibrium>> {
    if no_trade(params) || params.buyer_mass() == 0.0 {
        return Ok(vec![Equilibrium::no_trade()]);
    }
    NonDiscriminatorySolver::new(params)?.solve(params.buyer_mass())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::required_buyer_mass;
    use crate::mechanics::u_b;
    use crate::model::RawParams;

    fn fig2(k: f64, q: f64) -> MarketParams {
        MarketParams::new(RawParams {
            delta: 1.0,
            alpha: 0.1,
            u_high: 2.0,
            u_low: 1.0,
            price: 1.0,
            k,
            buyer_mass: q,
        })
        .unwrap()
    }

    fn check(eq: &Equilibrium, p: &MarketParams) {
        let q = eq.queues.group1;
        assert!(q.lambda_g > q.lambda_b && q.lambda_b > 0.0);
        let (ug, ub) = (u_g(q.lambda_g, p), u_b(q.lambda_b, p));
        assert!((ug - ub).abs() < 1e-8);
        let clear = required_buyer_mass(q, p, 1.0).unwrap();
        assert!((clear - p.buyer_mass()).abs() < 1e-8);
    }

    #[test]
    fn unique_for_figure_two_left() {
        let p = fig2(0.8682, 1.0);
        let eqs = solve_nondiscriminatory(&p).unwrap();
        assert_eq!(eqs.len(), 1);
        check(&eqs[0], &p);
    }

    #[test]
    fn three_for_figure_two_right() {
        // The clearing mass along the indifference curve turns down between
        // about 0.87 and 1.17 at these parameters.
        let p = fig2(0.9121, 1.0);
        let eqs = solve_nondiscriminatory(&p).unwrap();
        assert_eq!(eqs.len(), 3);
        for e in &eqs {
            check(e, &p);
        }
        // Larger λ_G comes with smaller λ_B and a higher payoff.
        for w in eqs.windows(2) {
            let (a, b) = (w[0].queues.group1, w[1].queues.group1);
            assert!(a.lambda_g < b.lambda_g && a.lambda_b > b.lambda_b);
            assert!(w[0].buyer_payoff < w[1].buyer_payoff);
        }
    }

    #[test]
    fn nearly_uninformative_ratings_equalise_queues() {
        let p = MarketParams::new(RawParams {
            alpha: 1e-12,
            buyer_mass: 0.37,
            ..fig2(0.8, 1.0).raw()
        })
        .unwrap();
        let eqs = solve_nondiscriminatory(&p).unwrap();
        assert_eq!(eqs.len(), 1);
        let q = eqs[0].queues.group1;
        assert!((q.lambda_g - 0.37).abs() < 1e-8 && (q.lambda_b - 0.37).abs() < 1e-8);
    }

    #[test]
    fn no_trade_and_zero_buyers() {
        let p = MarketParams::new(RawParams {
            price: 1.6,
            ..fig2(0.8, 1.0).raw()
        })
        .unwrap();
        let eqs = solve_nondiscriminatory(&p).unwrap();
        assert_eq!(eqs, vec![Equilibrium::no_trade()]);
        let eqs = solve_nondiscriminatory(&fig2(0.8, 0.0)).unwrap();
        assert_eq!(eqs[0].kind, EquilibriumKind::NoTrade);
    }
}
