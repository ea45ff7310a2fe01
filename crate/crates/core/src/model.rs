//! Domain types shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::MASS_TOL;

/// Unvalidated parameter record, as read from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub delta: f64,
    pub alpha: f64,
    pub u_high: f64,
    pub u_low: f64,
    pub price: f64,
    pub k: f64,
    pub buyer_mass: f64,
}

/// Validated market primitives.
///
/// `delta` is the type-switching rate, `alpha` the rating-correction
/// probability per trade, `u_high`/`u_low` the trade surplus by seller
/// type, `price` the transfer to the seller, `k` the matching elasticity
/// and `buyer_mass` the total measure of buyers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketParams {
    delta: f64,
    alpha: f64,
    u_high: f64,
    u_low: f64,
    price: f64,
    k: f64,
    buyer_mass: f64,
}

/// Checks every bound on a raw record. The first violated bound is reported.
pub fn validate_params(raw: &RawParams) -> Result<MarketParams> {
    let fields = [
        ("delta", raw.delta),
        ("alpha", raw.alpha),
        ("u_high", raw.u_high),
        ("u_low", raw.u_low),
        ("price", raw.price),
        ("k", raw.k),
        ("buyer_mass", raw.buyer_mass),
    ];
    for (name, v) in fields {
        if !v.is_finite() {
            return Err(Error::ViolatedBound { name });
        }
    }
    let checks: [(&'static str, bool); 8] = [
        ("delta", raw.delta > 0.0),
        ("alpha", raw.alpha > 0.0 && raw.alpha <= 1.0),
        ("k", raw.k > 0.0 && raw.k < 1.0),
        ("price", raw.price >= 0.0),
        ("u_low", raw.u_low >= 0.0),
        ("u_high>u_low", raw.u_high > raw.u_low),
        ("u_high>price", raw.u_high > raw.price),
        ("buyer_mass", raw.buyer_mass >= 0.0),
    ];
    for (name, ok) in checks {
        if !ok {
            return Err(Error::ViolatedBound { name });
        }
    }
    Ok(MarketParams {
        delta: raw.delta,
        alpha: raw.alpha,
        u_high: raw.u_high,
        u_low: raw.u_low,
        price: raw.price,
        k: raw.k,
        buyer_mass: raw.buyer_mass,
    })
}

impl MarketParams {
    pub fn new(raw: RawParams) -> Result<Self> {
        validate_params(&raw)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn u_high(&self) -> f64 {
        self.u_high
    }
    pub fn u_low(&self) -> f64 {
        self.u_low
    }
    pub fn price(&self) -> f64 {
        self.price
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn buyer_mass(&self) -> f64 {
        self.buyer_mass
    }

    /// Rating quality `α/δ`.
    pub fn beta(&self) -> f64 {
        self.alpha / self.delta
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            delta: self.delta,
            alpha: self.alpha,
            u_high: self.u_high,
            u_low: self.u_low,
            price: self.price,
            k: self.k,
            buyer_mass: self.buyer_mass,
        }
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(RawParams { k, ..self.raw() })
    }

    pub fn with_buyer_mass(&self, buyer_mass: f64) -> Result<Self> {
        Self::new(RawParams {
            buyer_mass,
            ..self.raw()
        })
    }

    pub fn with_rates(&self, delta: f64, alpha: f64) -> Result<Self> {
        Self::new(RawParams {
            delta,
            alpha,
            ..self.raw()
        })
    }

    /// Same market with rating quality `beta`. Keeps `δ = 1` while `β ≤ 1`
    /// and `α = 1` above, so `α` stays in `(0, 1]`.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        if beta <= 1.0 {
            self.with_rates(1.0, beta)
        } else {
            self.with_rates(1.0 / beta, 1.0)
        }
    }
}

/// Seller rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rating {
    G,
    B,
}

/// Buyers-per-seller ratios in the two rating submarkets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueuePair {
    pub lambda_g: f64,
    pub lambda_b: f64,
}

impl QueuePair {
    pub fn new(lambda_g: f64, lambda_b: f64) -> Result<Self> {
        let q = QueuePair { lambda_g, lambda_b };
        q.check()?;
        Ok(q)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [("lambda_g", self.lambda_g), ("lambda_b", self.lambda_b)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::ViolatedBound { name });
            }
        }
        Ok(())
    }

    pub const ZERO: QueuePair = QueuePair {
        lambda_g: 0.0,
        lambda_b: 0.0,
    };
}

/// Queue ratios for both seller groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueQuad {
    pub group1: QueuePair,
    pub group2: QueuePair,
}

impl QueueQuad {
    pub fn symmetric(pair: QueuePair) -> Self {
        QueueQuad {
            group1: pair,
            group2: pair,
        }
    }
}

/// Seller masses by (type, rating) for one seller population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub p_hg: f64,
    pub p_lg: f64,
    pub p_hb: f64,
    pub p_lb: f64,
    pub seller_mass: f64,
}

impl SteadyState {
    pub fn from_array(p: [f64; 4], seller_mass: f64) -> Self {
        SteadyState {
            p_hg: p[0],
            p_lg: p[1],
            p_hb: p[2],
            p_lb: p[3],
            seller_mass,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_hg, self.p_lg, self.p_hb, self.p_lb]
    }

    pub fn total(&self) -> f64 {
        self.p_hg + self.p_lg + self.p_hb + self.p_lb
    }

    pub fn g_mass(&self) -> f64 {
        self.p_hg + self.p_lg
    }

    pub fn b_mass(&self) -> f64 {
        self.p_hb + self.p_lb
    }

    /// Non-negativity and conservation to [`MASS_TOL`] (relative to the mass).
    pub fn is_consistent(&self) -> bool {
        self.as_array().iter().all(|&p| p >= 0.0)
            && (self.total() - self.seller_mass).abs() <= MASS_TOL * self.seller_mass.max(1.0)
    }

    /// Share of high types within each rating, `(μ_G, μ_B)`; `1/2` for an
    /// empty rating class.
    pub fn empirical_beliefs(&self) -> Beliefs {
        let share = |h: f64, l: f64| if h + l > 0.0 { h / (h + l) } else { 0.5 };
        Beliefs {
            mu_g: share(self.p_hg, self.p_lg),
            mu_b: share(self.p_hb, self.p_lb),
        }
    }
}

/// Probability that a seller with the given rating is the high type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beliefs {
    pub mu_g: f64,
    pub mu_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    NoTrade,
    NonDiscriminatory,
    Discriminatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityLabel {
    Stable,
    Unstable,
    NotAssessed,
}

/// A classified equilibrium.
///
/// For discriminatory equilibria group 1 is the favoured group (larger
/// `λ_G`). `buyer_split` holds the buyer masses `(Q¹, Q²)` serving each
/// group of mass 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub queues: QueueQuad,
    pub buyer_payoff: f64,
    pub buyer_split: (f64, f64),
    pub stability: StabilityLabel,
}

impl Equilibrium {
    pub fn no_trade() -> Self {
        Equilibrium {
            kind: EquilibriumKind::NoTrade,
            queues: QueueQuad::symmetric(QueuePair::ZERO),
            buyer_payoff: 0.0,
            buyer_split: (0.0, 0.0),
            stability: StabilityLabel::NotAssessed,
        }
    }

    pub fn total_buyers(&self) -> f64 {
        self.buyer_split.0 + self.buyer_split.1
    }
}

/// Seller masses over time from the flow integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<SteadyState>,
    pub terminal_residual: f64,
}

impl FlowTrajectory {
    pub fn terminal(&self) -> &SteadyState {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }

    /// Writes `time,p_hg,p_lg,p_hb,p_lb` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "time,p_hg,p_lg,p_hb,p_lb")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(
                w,
                "{},{},{},{},{}",
                crate::cli::fmt_num(*t),
                crate::cli::fmt_num(s.p_hg),
                crate::cli::fmt_num(s.p_lg),
                crate::cli::fmt_num(s.p_hb),
                crate::cli::fmt_num(s.p_lb)
            )?;
        }
        Ok(())
    }
}
