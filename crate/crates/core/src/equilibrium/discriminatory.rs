use rayon::prelude::*;
use serde::Serialize;

use super::{bi_curve, clearing_mass, no_trade};
use crate::error::{Error, Result};
use crate::mechanics::{u_b, u_g, ug_increasing_interval};
use crate::model::{Equilibrium, EquilibriumKind, MarketParams, QueuePair, QueueQuad, StabilityLabel};
use crate::roots::{bisect, expand_bracket, golden_min, grid_roots, lobatto_grid};
use crate::tol::{BAND_GRID, DEDUP_TOL, LAMBDA_CAP, LAMBDA_FLOOR};

/// Unordered branch pairs `(m, m')`, zero-based.
pub const BRANCH_PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

/// Where `u_G` is non-monotone: it falls to a local minimum at
/// `lambda_g_lower`, rises to a local maximum at `lambda_g_upper`, then falls
/// again. Every `λ_B` in `[lambda_b_lower, lambda_b_upper]` has three `G`
/// queues with the same payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchBand {
    pub lambda_g_lower: f64,
    pub lambda_g_upper: f64,
    pub lambda_b_lower: f64,
    pub lambda_b_upper: f64,
    /// `u_G(λ̲_G) = u_B(λ̄_B)`.
    pub payoff_min: f64,
    /// `u_G(λ̄_G) = u_B(λ̲_B)`.
    pub payoff_max: f64,
}

/// The `G` queues `h1 <= h2 <= h3` sharing the payoff of `lambda_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchTriple {
    pub lambda_b: f64,
    pub h: [f64; 3],
    /// Number of distinct values among `h`.
    pub multiplicity: u8,
}

const ENDPOINT_SNAP: f64 = 1e-12;

impl BranchBand {
    /// `None` outside the trade regime or when `u_G` is monotone.
    pub fn new(params: &MarketParams) -> Result<Option<Self>> {
        if no_trade(params) {
            return Ok(None);
        }
        let Some((g_lo, g_hi)) = ug_increasing_interval(params)? else {
            return Ok(None);
        };
        Ok(Some(BranchBand {
            lambda_g_lower: g_lo,
            lambda_g_upper: g_hi,
            lambda_b_lower: bi_curve(g_hi, params)?,
            lambda_b_upper: bi_curve(g_lo, params)?,
            payoff_min: u_g(g_lo, params),
            payoff_max: u_g(g_hi, params),
        }))
    }

    pub fn contains(&self, lambda_b: f64) -> bool {
        lambda_b >= self.lambda_b_lower * (1.0 - ENDPOINT_SNAP)
            && lambda_b <= self.lambda_b_upper * (1.0 + ENDPOINT_SNAP)
    }

    /// Solves `u_G(λ_G) = u_B(lambda_b)` separately on the decreasing,
    /// increasing and decreasing stretches of `u_G`.
    pub fn triple(&self, lambda_b: f64, params: &MarketParams) -> Result<BranchTriple> {
        if !self.contains(lambda_b) {
            return Err(Error::OutOfBand {
                lambda_b,
                lower: self.lambda_b_lower,
                upper: self.lambda_b_upper,
            });
        }
        let (g_lo, g_hi) = (self.lambda_g_lower, self.lambda_g_upper);
        // At the band edges the target sits exactly on an extremum of u_G.
        let target = if lambda_b >= self.lambda_b_upper * (1.0 - ENDPOINT_SNAP) {
            self.payoff_min
        } else if lambda_b <= self.lambda_b_lower * (1.0 + ENDPOINT_SNAP) {
            self.payoff_max
        } else {
            u_b(lambda_b, params).clamp(self.payoff_min, self.payoff_max)
        };
        let f = |lg: f64| u_g(lg, params) - target;

        let h1 = if target <= self.payoff_min {
            g_lo
        } else {
            let (lo, hi) = expand_bracket(f, g_lo * 0.5, g_lo, LAMBDA_FLOOR, g_lo, "first branch")?;
            bisect(f, lo, hi)?
        };
        let h2 = if target <= self.payoff_min {
            g_lo
        } else if target >= self.payoff_max {
            g_hi
        } else {
            bisect(f, g_lo, g_hi)?
        };
        let h3 = if target >= self.payoff_max {
            g_hi
        } else {
            let (lo, hi) = expand_bracket(f, g_hi, g_hi * 2.0, g_hi, LAMBDA_CAP, "third branch")?;
            bisect(f, lo, hi)?
        };
        let h = [h1, h2, h3];
        let distinct = |a: f64, b: f64| (a - b).abs() > 1e-9 * a.max(b);
        let multiplicity = 1 + distinct(h1, h2) as u8 + distinct(h2, h3) as u8;
        Ok(BranchTriple {
            lambda_b,
            h,
            multiplicity,
        })
    }
}

/// The branch triple at `lambda_b`; requires `k > k̲`.
pub fn branch_triple(lambda_b: f64, params: &MarketParams) -> Result<BranchTriple> {
    let band = BranchBand::new(params)?.ok_or(Error::InvalidRegime("u_G is monotone (k <= k_threshold)"))?;
    band.triple(lambda_b, params)
}

/// Closed range of buyer masses that support discriminatory equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QInterval {
    pub lower: f64,
    pub upper: f64,
    /// `(min, max)` of the buyer mass along each entry of [`BRANCH_PAIRS`].
    pub pair_ranges: [(f64, f64); 3],
    /// Whether the union of `pair_ranges` has no gaps.
    pub connected: bool,
}

impl QInterval {
    pub fn contains(&self, q: f64) -> bool {
        q > self.lower && q < self.upper
    }
}

/// Buyer mass needed by a group of mass 1/2 at `(λ_G, λ_B)`.
fn group_mass(lambda_g: f64, lambda_b: f64, params: &MarketParams) -> f64 {
    0.5 * clearing_mass(lambda_g, lambda_b, params)
}

fn pair_mass(t: &BranchTriple, (m, n): (usize, usize), params: &MarketParams) -> f64 {
    group_mass(t.h[m], t.lambda_b, params) + group_mass(t.h[n], t.lambda_b, params)
}

/// Branch triples tabulated across the band, from which discriminatory
/// equilibria are read off for any buyer mass.
#[derive(Debug, Clone)]
pub struct DiscriminatoryMap {
    params: MarketParams,
    band: BranchBand,
    triples: Vec<BranchTriple>,
}

impl DiscriminatoryMap {
    /// `None` when no band exists. Nodes cluster at the band edges, where the
    /// branches split off a double root and move fastest.
    pub fn new(params: &MarketParams) -> Result<Option<Self>> {
        let Some(band) = BranchBand::new(params)? else {
            return Ok(None);
        };
        let nodes = lobatto_grid(band.lambda_b_lower, band.lambda_b_upper, BAND_GRID);
        let triples = nodes
            .par_iter()
            .map(|&lb| band.triple(lb, params))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(DiscriminatoryMap {
            params: *params,
            band,
            triples,
        }))
    }

    pub fn band(&self) -> &BranchBand {
        &self.band
    }

    pub fn triples(&self) -> &[BranchTriple] {
        &self.triples
    }

    fn nodes(&self) -> Vec<f64> {
        self.triples.iter().map(|t| t.lambda_b).collect()
    }

    fn pair_values(&self, pair: (usize, usize)) -> Vec<f64> {
        self.triples
            .iter()
            .map(|t| pair_mass(t, pair, &self.params))
            .collect()
    }

    fn pair_at(&self, lambda_b: f64, pair: (usize, usize)) -> f64 {
        match self.band.triple(lambda_b, &self.params) {
            Ok(t) => pair_mass(&t, pair, &self.params),
            Err(_) => f64::NAN,
        }
    }

    /// Range of buyer masses over all branch pairs. Interior extrema are
    /// refined between grid nodes.
    pub fn q_interval(&self) -> QInterval {
        let xs = self.nodes();
        let mut pair_ranges = [(0.0, 0.0); 3];
        for (slot, &pair) in pair_ranges.iter_mut().zip(BRANCH_PAIRS.iter()) {
            let vals = self.pair_values(pair);
            let mut lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for i in 1..vals.len() - 1 {
                let (l, m, r) = (vals[i - 1], vals[i], vals[i + 1]);
                if m <= l && m <= r {
                    let (_, v) = golden_min(|x| self.pair_at(x, pair), xs[i - 1], xs[i + 1]);
                    lo = lo.min(v);
                }
                if m >= l && m >= r {
                    let (_, v) = golden_min(|x| -self.pair_at(x, pair), xs[i - 1], xs[i + 1]);
                    hi = hi.max(-v);
                }
            }
            *slot = (lo, hi);
        }
        let mut sorted = pair_ranges;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut reach = sorted[0].1;
        let mut connected = true;
        for &(lo, hi) in &sorted[1..] {
            if lo > reach * (1.0 + 1e-9) {
                connected = false;
            }
            reach = reach.max(hi);
        }
        QInterval {
            lower: sorted[0].0,
            upper: reach,
            pair_ranges,
            connected,
        }
    }

    /// Discriminatory equilibria with total buyer mass `buyer_mass`.
    pub fn equilibria(&self, buyer_mass: f64) -> Vec<Equilibrium> {
        let xs = self.nodes();
        let mut found: Vec<Equilibrium> = Vec::new();
        for pair in BRANCH_PAIRS {
            let vals: Vec<f64> = self.pair_values(pair).iter().map(|v| v - buyer_mass).collect();
            let roots = grid_roots(|x| self.pair_at(x, pair) - buyer_mass, &xs, &vals);
            for lb in roots {
                let Ok(t) = self.band.triple(lb, &self.params) else {
                    continue;
                };
                let (a, b) = (t.h[pair.0], t.h[pair.1]);
                let (favoured, other) = (a.max(b), a.min(b));
                if favoured - other <= DEDUP_TOL * favoured.max(1.0) {
                    continue;
                }
                let eq = Equilibrium {
                    kind: EquilibriumKind::Discriminatory,
                    queues: QueueQuad {
                        group1: QueuePair {
                            lambda_g: favoured,
                            lambda_b: lb,
                        },
                        group2: QueuePair {
                            lambda_g: other,
                            lambda_b: lb,
                        },
                    },
                    buyer_payoff: u_b(lb, &self.params),
                    buyer_split: (
                        group_mass(favoured, lb, &self.params),
                        group_mass(other, lb, &self.params),
                    ),
                    stability: StabilityLabel::NotAssessed,
                };
                let dup = found.iter().any(|e| {
                    let (p, q) = (e.queues, eq.queues);
                    (p.group1.lambda_g - q.group1.lambda_g)
                        .abs()
                        .max((p.group2.lambda_g - q.group2.lambda_g).abs())
                        .max((p.group1.lambda_b - q.group1.lambda_b).abs())
                        <= DEDUP_TOL
                });
                if !dup {
                    found.push(eq);
                }
            }
        }
        found.sort_by(|a, b| {
            a.queues
                .group1
                .lambda_b
                .total_cmp(&b.queues.group1.lambda_b)
                .then(a.queues.group1.lambda_g.total_cmp(&b.queues.group1.lambda_g))
        });
        found
    }
}

/// Every discriminatory equilibrium at the configured buyer mass. Empty
/// when `u_G` is monotone.
pub fn enumerate_discriminatory(params: &MarketParams) -> Result<Vec<Equilibrium>> {
    if params.buyer_mass() <= 0.0 {
        return Ok(Vec::new());
    }
    Ok(DiscriminatoryMap::new(params)?
        .map(|m| m.equilibria(params.buyer_mass()))
        .unwrap_or_default())
}

/// Buyer masses `(Q̲, Q̄)` for which discriminatory equilibria exist.
pub fn discriminatory_q_interval(params: &MarketParams) -> Result<Option<QInterval>> {
    Ok(DiscriminatoryMap::new(params)?.map(|m| m.q_interval()))
}
