use std::collections::BTreeMap;

use serde::Serialize;

use super::CliError;
use crate::equilibrium::{beta_interval, no_trade, DiscriminatoryMap};
use crate::error::{Error, Result};
use crate::mechanics::{self, k_threshold, mu_threshold, ug_increasing_interval};
use crate::model::{Equilibrium, EquilibriumKind, MarketParams, QueuePair, RawParams, StabilityLabel};
use crate::stability::{Derivative, GroupPayoff, StabilityReport};

/// Every equilibrium at one parameter point together with its stability
/// classification. `stability_error` records why classification was
/// impossible, in which case every entry stays unassessed.
pub(crate) struct Analysis {
    pub equilibria: Vec<Equilibrium>,
    pub reports: Vec<Option<StabilityReport>>,
    pub stability_error: Option<Error>,
}

impl Analysis {
    pub fn count(&self, kind: EquilibriumKind) -> usize {
        self.equilibria.iter().filter(|e| e.kind == kind).count()
    }

    pub fn count_stability(&self, label: StabilityLabel) -> usize {
        self.equilibria
            .iter()
            .zip(&self.reports)
            .filter(|(e, r)| r.map_or(e.stability, |r| r.equilibrium.stability) == label)
            .count()
    }
}

pub(crate) fn analyse(params: &MarketParams) -> Result<Analysis> {
    let q = params.buyer_mass();
    if no_trade(params) || q == 0.0 {
        return Ok(Analysis {
            equilibria: vec![Equilibrium::no_trade()],
            reports: vec![None],
            stability_error: None,
        });
    }
    let payoff = GroupPayoff::new(params)?;
    let equilibria = payoff.equilibria(q)?;
    let classified: Result<Vec<StabilityReport>> = equilibria.iter().map(|e| payoff.classify(e)).collect();
    Ok(match classified {
        Ok(reports) => Analysis {
            equilibria: reports.iter().map(|r| r.equilibrium).collect(),
            reports: reports.into_iter().map(Some).collect(),
            stability_error: None,
        },
        Err(e) => Analysis {
            reports: vec![None; equilibria.len()],
            equilibria,
            stability_error: Some(e),
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupEntry {
    pub lambda_g: f64,
    pub lambda_b: f64,
    pub mu_g: f64,
    pub mu_b: f64,
    pub u_g: Option<f64>,
    pub u_b: Option<f64>,
    pub buyers: f64,
}

impl GroupEntry {
    fn new(q: QueuePair, buyers: f64, params: &MarketParams, trade: bool) -> Self {
        let b = mechanics::beliefs(q, params);
        GroupEntry {
            lambda_g: q.lambda_g,
            lambda_b: q.lambda_b,
            mu_g: b.mu_g,
            mu_b: b.mu_b,
            u_g: trade.then(|| mechanics::u_g(q.lambda_g, params)),
            u_b: trade.then(|| mechanics::u_b(q.lambda_b, params)),
            buyers,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumEntry {
    pub kind: EquilibriumKind,
    pub groups: [GroupEntry; 2],
    pub buyer_payoff: f64,
    pub buyer_split: (f64, f64),
    pub stability: StabilityLabel,
    /// `U'(Q¹) + U'(Q²)`.
    pub criterion_value: Option<f64>,
    pub u_prime: Option<[Derivative; 2]>,
    /// One-sided differences of `U` disagree by more than 1e-3 relative at
    /// either group; both are listed under `u_prime`.
    pub u_prime_one_sided_disagree: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub params: RawParams,
    pub trade: bool,
    pub equilibria: Vec<EquilibriumEntry>,
}

pub fn solve_report(params: &MarketParams) -> std::result::Result<SolveReport, CliError> {
    let analysis = analyse(params)?;
    if let Some(e) = analysis.stability_error {
        return Err(e.into());
    }
    let equilibria = analysis
        .equilibria
        .iter()
        .zip(&analysis.reports)
        .map(|(e, r)| {
            let trade = e.kind != EquilibriumKind::NoTrade;
            EquilibriumEntry {
                kind: e.kind,
                groups: [
                    GroupEntry::new(e.queues.group1, e.buyer_split.0, params, trade),
                    GroupEntry::new(e.queues.group2, e.buyer_split.1, params, trade),
                ],
                buyer_payoff: e.buyer_payoff,
                buyer_split: e.buyer_split,
                stability: e.stability,
                criterion_value: r.map(|r| r.criterion_value),
                u_prime: r.map(|r| [r.u_prime_q1, r.u_prime_q2]),
                u_prime_one_sided_disagree: r
                    .map(|r| r.u_prime_q1.one_sided_disagree() || r.u_prime_q2.one_sided_disagree()),
            }
        })
        .collect();
    Ok(SolveReport {
        params: params.raw(),
        trade: !no_trade(params),
        equilibria,
    })
}

/// Thresholds at one parameter point. Absent values are `null`, with the
/// reason under `reasons`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ThresholdsReport {
    pub params: Option<RawParams>,
    pub k_threshold: Option<f64>,
    pub mu_threshold: Option<f64>,
    pub lambda_g_lower: Option<f64>,
    pub lambda_g_upper: Option<f64>,
    pub lambda_b_lower: Option<f64>,
    pub lambda_b_upper: Option<f64>,
    pub q_lower: Option<f64>,
    pub q_upper: Option<f64>,
    pub beta_lower: Option<f64>,
    pub beta_upper: Option<f64>,
    pub reasons: BTreeMap<&'static str, String>,
}

const NO_TRADE: &str = "no trade ((u_high + u_low)/2 <= price)";
const MONOTONE: &str = "u_G monotone (k ≤ k̲)";

pub fn thresholds_report(params: &MarketParams) -> std::result::Result<ThresholdsReport, CliError> {
    Ok(thresholds(params)?)
}

pub(crate) fn thresholds(params: &MarketParams) -> Result<ThresholdsReport> {
    let mut r = ThresholdsReport {
        params: Some(params.raw()),
        mu_threshold: Some(mu_threshold(params)),
        ..Default::default()
    };
    let interval_fields = [
        "lambda_g_lower",
        "lambda_g_upper",
        "lambda_b_lower",
        "lambda_b_upper",
        "q_lower",
        "q_upper",
        "beta_lower",
        "beta_upper",
    ];
    let absent = |r: &mut ThresholdsReport, fields: &[&'static str], why: &str| {
        for f in fields {
            r.reasons.insert(f, why.to_string());
        }
    };
    if no_trade(params) {
        absent(&mut r, &["k_threshold"], NO_TRADE);
        absent(&mut r, &interval_fields, NO_TRADE);
        return Ok(r);
    }
    r.k_threshold = Some(k_threshold(params)?);
    let Some((lo, hi)) = ug_increasing_interval(params)? else {
        absent(&mut r, &interval_fields, MONOTONE);
        return Ok(r);
    };
    r.lambda_g_lower = Some(lo);
    r.lambda_g_upper = Some(hi);
    let Some(map) = DiscriminatoryMap::new(params)? else {
        absent(&mut r, &interval_fields[2..], MONOTONE);
        return Ok(r);
    };
    r.lambda_b_lower = Some(map.band().lambda_b_lower);
    r.lambda_b_upper = Some(map.band().lambda_b_upper);
    let iv = map.q_interval();
    r.q_lower = Some(iv.lower);
    r.q_upper = Some(iv.upper);
    match beta_interval(params)? {
        Some((lo, hi)) => {
            r.beta_lower = Some(lo);
            r.beta_upper = Some(hi);
        }
        None => absent(&mut r, &interval_fields[6..], "buyer_mass = 0"),
    }
    Ok(r)
}
