//! Stability of equilibria under small reallocations of buyers between the
//! two seller groups.
//!
//! `U(q)` is the buyer payoff in the non-discriminatory equilibrium of one
//! group (mass 1/2) served by `q` buyers. Any equilibrium is a split
//! `(Q¹, Q²)` with `U(Q¹) = U(Q²)`; it is stable when
//! `U'(Q¹) + U'(Q²) <= 0`, so buyers drifting to one group earn less there
//! and drift back.

use serde::Serialize;

use crate::equilibrium::{no_trade, BranchBand, DiscriminatoryMap, NonDiscriminatorySolver};
use crate::error::{Error, Result};
use crate::mechanics::trade_regime;
use crate::model::{Equilibrium, EquilibriumKind, MarketParams, QueuePair, QueueQuad, StabilityLabel};
use crate::roots::{bisect, lin_grid, sign_change_cells};
use crate::tol::G_GRID;

/// Relative disagreement between one-sided differences above which both
/// estimates are worth reporting, as at a kink of `U`.
const KINK_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivative {
    pub central: f64,
    pub forward: f64,
    pub backward: f64,
    pub step: f64,
}

impl Derivative {
    pub fn one_sided_disagree(&self) -> bool {
        let scale = self.forward.abs().max(self.backward.abs()).max(1e-300);
        (self.forward - self.backward).abs() > KINK_TOL * scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Unstable,
}

impl From<Verdict> for StabilityLabel {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Stable => StabilityLabel::Stable,
            Verdict::Unstable => StabilityLabel::Unstable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub equilibrium: Equilibrium,
    pub u_prime_q1: Derivative,
    pub u_prime_q2: Derivative,
    pub verdict: Verdict,
    /// `U'(Q¹) + U'(Q²)`.
    pub criterion_value: f64,
}

/// Evaluates `U` and its derivative for one parameter set, reusing the
/// tabulated indifference curve.
#[derive(Debug, Clone)]
pub struct GroupPayoff {
    solver: NonDiscriminatorySolver,
}

impl GroupPayoff {
    pub fn new(params: &MarketParams) -> Result<Self> {
        if !trade_regime(params) {
            return Err(Error::InvalidRegime("(u_high + u_low)/2 <= price"));
        }
        Ok(GroupPayoff {
            solver: NonDiscriminatorySolver::new(params)?,
        })
    }

    pub fn params(&self) -> &MarketParams {
        self.solver.params()
    }

    /// The underlying single-population solver.
    pub fn solver(&self) -> &NonDiscriminatorySolver {
        &self.solver
    }

    /// Queues of the unique non-discriminatory equilibrium of a group served
    /// by `q` buyers.
    pub fn queues(&self, q: f64) -> Result<QueuePair> {
        if q.is_nan() || q <= 0.0 {
            return Err(Error::InvalidArgument(format!("U(q) needs q > 0, got {q}")));
        }
        let buyer_mass = 2.0 * q;
        let roots = self.solver.roots(buyer_mass);
        match roots.as_slice() {
            [lg] => Ok(QueuePair {
                lambda_g: *lg,
                lambda_b: crate::equilibrium::bi_curve(*lg, self.params())?,
            }),
            [] => Err(Error::NoEquilibrium { buyer_mass }),
            many => Err(Error::MultipleEquilibria {
                buyer_mass,
                count: many.len(),
            }),
        }
    }

    /// `U(q)`.
    pub fn value(&self, q: f64) -> Result<f64> {
        let pair = self.queues(q)?;
        Ok(crate::mechanics::u_g(pair.lambda_g, self.params()))
    }

    /// Central difference of `U` with relative step `1e-5`, plus both
    /// one-sided differences.
    pub fn derivative(&self, q: f64) -> Result<Derivative> {
        let step = (1e-5 * q.max(1.0)).min(0.5 * q);
        let (lo, mid, hi) = (self.value(q - step)?, self.value(q)?, self.value(q + step)?);
        Ok(Derivative {
            central: (hi - lo) / (2.0 * step),
            forward: (hi - mid) / step,
            backward: (mid - lo) / step,
            step,
        })
    }

    /// `g(x) = U(Q/2 + x) - U(Q/2 - x)`.
    pub fn asymmetry(&self, x: f64, buyer_mass: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        if !(x > 0.0 && x < 0.5 * buyer_mass) {
            return Err(Error::InvalidArgument(format!(
                "asymmetry needs 0 <= x < Q/2, got x = {x}, Q = {buyer_mass}"
            )));
        }
        let half = 0.5 * buyer_mass;
        Ok(self.value(half + x)? - self.value(half - x)?)
    }

    pub fn classify(&self, eq: &Equilibrium) -> Result<StabilityReport> {
        if eq.kind == EquilibriumKind::NoTrade {
            return Err(Error::InvalidRegime(
                "no-trade outcome has no stability criterion",
            ));
        }
        let (q1, q2) = eq.buyer_split;
        let d1 = self.derivative(q1)?;
        let d2 = if q1 == q2 { d1 } else { self.derivative(q2)? };
        let criterion_value = d1.central + d2.central;
        let verdict = if criterion_value <= 0.0 {
            Verdict::Stable
        } else {
            Verdict::Unstable
        };
        let mut equilibrium = *eq;
        equilibrium.stability = verdict.into();
        Ok(StabilityReport {
            equilibrium,
            u_prime_q1: d1,
            u_prime_q2: d2,
            verdict,
            criterion_value,
        })
    }

    /// Every trading equilibrium at `buyer_mass`, unclassified:
    /// non-discriminatory ones by `λ_G`, then discriminatory ones.
    pub fn equilibria(&self, buyer_mass: f64) -> Result<Vec<Equilibrium>> {
        let mut out = self.solver.solve(buyer_mass)?;
        if buyer_mass > 0.0 {
            if let Some(map) = DiscriminatoryMap::new(self.params())? {
                out.extend(map.equilibria(buyer_mass));
            }
        }
        Ok(out)
    }

    /// Roots of `g` on `(0, Q/2)`, ascending.
    pub fn asymmetry_roots(&self, buyer_mass: f64) -> Result<Vec<f64>> {
        let eps = 1e-4 * buyer_mass;
        let xs = lin_grid(0.0, 0.5 * buyer_mass - eps, G_GRID);
        let vals = xs[1..]
            .iter()
            .map(|&x| self.asymmetry(x, buyer_mass))
            .collect::<Result<Vec<f64>>>()?;
        let mut roots = Vec::new();
        for i in sign_change_cells(&vals) {
            let (a, b) = (xs[i + 1], xs[i + 2]);
            // Errors cannot occur here: every point was evaluated above.
            let r = bisect(|x| self.asymmetry(x, buyer_mass).unwrap_or(f64::NAN), a, b)?;
            roots.push(r);
        }
        Ok(roots)
    }

    /// The discriminatory equilibrium at the largest root of `g`, where `g`
    /// crosses from positive to negative, together with its classification.
    pub fn stable_discriminatory(&self, buyer_mass: f64) -> Result<Option<StabilityReport>> {
        let roots = self.asymmetry_roots(buyer_mass)?;
        let Some(&x) = roots.last() else {
            return Ok(None);
        };
        let half = 0.5 * buyer_mass;
        let (q_more, q_less) = (half + x, half - x);
        let (a, b) = (self.queues(q_more)?, self.queues(q_less)?);
        let ((g1, m1), (g2, m2)) = if a.lambda_g >= b.lambda_g {
            ((a, q_more), (b, q_less))
        } else {
            ((b, q_less), (a, q_more))
        };
        let eq = Equilibrium {
            kind: EquilibriumKind::Discriminatory,
            queues: QueueQuad {
                group1: g1,
                group2: g2,
            },
            buyer_payoff: crate::mechanics::u_b(g1.lambda_b, self.params()),
            buyer_split: (m1, m2),
            stability: StabilityLabel::NotAssessed,
        };
        self.classify(&eq).map(Some)
    }
}

/// `U(q)`.
pub fn u_of_q(q: f64, params: &MarketParams) -> Result<f64> {
    GroupPayoff::new(params)?.value(q)
}

/// Finite-difference `U'(q)`.
pub fn u_prime(q: f64, params: &MarketParams) -> Result<Derivative> {
    GroupPayoff::new(params)?.derivative(q)
}

pub fn classify_stability(eq: &Equilibrium, params: &MarketParams) -> Result<StabilityReport> {
    GroupPayoff::new(params)?.classify(eq)
}

/// `g(x) = U(Q/2 + x) - U(Q/2 - x)`.
pub fn g_function(x: f64, buyer_mass: f64, params: &MarketParams) -> Result<f64> {
    GroupPayoff::new(params)?.asymmetry(x, buyer_mass)
}

/// Every equilibrium at the configured buyer mass with its stability
/// verdict. The no-trade outcome is returned alone and not assessed.
pub fn solve_with_stability(params: &MarketParams) -> Result<Vec<Equilibrium>> {
    if no_trade(params) || params.buyer_mass() == 0.0 {
        return Ok(vec![Equilibrium::no_trade()]);
    }
    let payoff = GroupPayoff::new(params)?;
    payoff
        .equilibria(params.buyer_mass())?
        .iter()
        .map(|e| payoff.classify(e).map(|r| r.equilibrium))
        .collect()
}

/// A stable discriminatory equilibrium at buyer mass `buyer_mass`, if any
/// discriminatory equilibrium exists.
pub fn find_stable_discriminatory(buyer_mass: f64, params: &MarketParams) -> Result<Option<StabilityReport>> {
    if !trade_regime(params) || buyer_mass <= 0.0 || BranchBand::new(params)?.is_none() {
        return Ok(None);
    }
    GroupPayoff::new(params)?.stable_discriminatory(buyer_mass)
}
