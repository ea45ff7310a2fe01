//! Time evolution of the seller population at fixed queues.
//!
//! [`integrate_flows`] integrates the deterministic flow equations and
//! [`simulate_population`] runs a finite population event by event. Both
//! only use the primitive transition rules, so they serve as independent
//! checks on the closed-form steady state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanics::{flow_residuals, seller_match_rate};
use crate::model::{FlowTrajectory, MarketParams, QueuePair, SteadyState};

/// Upper bound on stored snapshots; intermediate steps are thinned.
const MAX_SNAPSHOTS: usize = 4096;
const MAX_HALVINGS: u32 = 20;
const BATCHES: usize = 20;

/// A step that resolves both the type-switching and the rating-correction
/// time scales.
pub fn default_step(queues: QueuePair, params: &MarketParams) -> f64 {
    let k = params.k();
    let psi = seller_match_rate(queues.lambda_g, k).max(seller_match_rate(queues.lambda_b, k));
    let fast = params.alpha() * psi;
    let mut h = 0.01 / params.delta();
    if fast > 0.0 {
        h = h.min(0.01 / fast);
    }
    h
}

fn rk4_step(s: &SteadyState, q: QueuePair, p: &MarketParams, h: f64) -> SteadyState {
    let at = |base: &SteadyState, d: &[f64; 4], c: f64| {
        let b = base.as_array();
        SteadyState::from_array(
            [b[0] + c * d[0], b[1] + c * d[1], b[2] + c * d[2], b[3] + c * d[3]],
            base.seller_mass,
        )
    };
    let k1 = flow_residuals(s, q, p);
    let k2 = flow_residuals(&at(s, &k1, 0.5 * h), q, p);
    let k3 = flow_residuals(&at(s, &k2, 0.5 * h), q, p);
    let k4 = flow_residuals(&at(s, &k3, h), q, p);
    let mut out = s.as_array();
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    SteadyState::from_array(out, s.seller_mass)
}

fn max_abs(r: [f64; 4]) -> f64 {
    r.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Integrates the flow equations from `initial` to `horizon` with classical
/// Runge-Kutta. A step producing a negative mass restarts the run with half
/// the step.
pub fn integrate_flows(
    initial: SteadyState,
    queues: QueuePair,
    params: &MarketParams,
    horizon: f64,
    step: f64,
) -> Result<FlowTrajectory> {
    queues.check()?;
    if initial.as_array().iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidArgument(
            "initial masses must be finite and non-negative".into(),
        ));
    }
    if !(horizon >= 0.0 && horizon.is_finite() && step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need finite horizon >= 0 and step > 0, got {horizon} and {step}"
        )));
    }
    let mut h = step;
    for _ in 0..=MAX_HALVINGS {
        if let Some(traj) = try_integrate(initial, queues, params, horizon, h) {
            return Ok(traj);
        }
        h *= 0.5;
    }
    Err(Error::StepTooLarge {
        step: 2.0 * h,
        retries: MAX_HALVINGS,
    })
}

fn try_integrate(
    initial: SteadyState,
    queues: QueuePair,
    params: &MarketParams,
    horizon: f64,
    h: f64,
) -> Option<FlowTrajectory> {
    let full = (horizon / h).floor() as u64;
    let rest = horizon - full as f64 * h;
    let total = full + u64::from(rest > 0.0);
    let stride = total.div_ceil(MAX_SNAPSHOTS as u64).max(1);
    let mut times = vec![0.0];
    let mut states = vec![initial];
    let mut s = initial;
    let mut t = 0.0;
    for i in 1..=total {
        let dt = if i > full { rest } else { h };
        s = rk4_step(&s, queues, params, dt);
        if s.as_array().iter().any(|&x| x < 0.0) {
            return None;
        }
        t = if i == total { horizon } else { i as f64 * h };
        if i % stride == 0 || i == total {
            times.push(t);
            states.push(s);
        }
    }
    debug_assert!(total == 0 || t == horizon);
    Some(FlowTrajectory {
        times,
        states,
        terminal_residual: max_abs(flow_residuals(&s, queues, params)),
    })
}

/// Time-averaged occupancy of a simulated finite population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationSample {
    /// Average share of sellers in each cell over the second half of the
    /// run, scaled to unit seller mass.
    pub occupancy: SteadyState,
    /// Batch-means standard errors of the four shares.
    pub std_error: [f64; 4],
    pub sellers: usize,
    pub events: u64,
}

/// Simulates `sellers` individual sellers facing fixed queues.
///
/// Each seller's type flips at rate `δ`; a seller trades at rate `ψ(λ)` of
/// its rating and the trade reveals the type with probability `α`. Only
/// transitions that change a seller's cell are generated, so a low type
/// rated `G` leaves at rate `δ + αψ(λ_G)` and a high type rated `B` at
/// `δ + αψ(λ_B)`. Starts from equal counts and averages over the second
/// half of `horizon`.
pub fn simulate_population(
    sellers: usize,
    queues: QueuePair,
    params: &MarketParams,
    horizon: f64,
    seed: u64,
) -> Result<PopulationSample> {
    queues.check()?;
    if sellers < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 sellers, got {sellers}"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let k = params.k();
    let d = params.delta();
    let corr_g = params.alpha() * seller_match_rate(queues.lambda_g, k);
    let corr_b = params.alpha() * seller_match_rate(queues.lambda_b, k);
    let rates = [d, d + corr_g, d + corr_b, d];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [sellers / 4; 4];
    counts[0] += sellers - 4 * (sellers / 4);

    let start = 0.5 * horizon;
    let batch_len = (horizon - start) / BATCHES as f64;
    let mut batch = vec![[0.0f64; 4]; BATCHES];
    let mut t = 0.0;
    let mut events = 0u64;

    // Adds the occupancy of `counts` over [a, b) to the batch accumulators.
    let accumulate = |batch: &mut [[f64; 4]], counts: &[usize; 4], a: f64, b: f64| {
        let (a, b) = (a.max(start), b.min(horizon));
        if b <= a {
            return;
        }
        let first = (((a - start) / batch_len) as usize).min(BATCHES - 1);
        let last = (((b - start) / batch_len) as usize).min(BATCHES - 1);
        for (j, acc) in batch.iter_mut().enumerate().take(last + 1).skip(first) {
            let lo = a.max(start + j as f64 * batch_len);
            let hi = b.min(start + (j + 1) as f64 * batch_len);
            if hi > lo {
                for c in 0..4 {
                    acc[c] += counts[c] as f64 * (hi - lo);
                }
            }
        }
    };

    loop {
        let weights: [f64; 4] = std::array::from_fn(|c| counts[c] as f64 * rates[c]);
        let total: f64 = weights.iter().sum();
        let dt = -(1.0 - rng.gen::<f64>()).ln() / total;
        let next = t + dt;
        accumulate(&mut batch, &counts, t, next);
        if next >= horizon {
            break;
        }
        t = next;
        events += 1;
        let mut pick = rng.gen::<f64>() * total;
        let mut cell = 3;
        for (c, w) in weights.iter().enumerate() {
            if pick < *w {
                cell = c;
                break;
            }
            pick -= w;
        }
        // HG, LG, HB, LB
        let target = match cell {
            0 => 1,
            1 => {
                if rng.gen::<f64>() * rates[1] < d {
                    0
                } else {
                    3
                }
            }
            2 => {
                if rng.gen::<f64>() * rates[2] < d {
                    3
                } else {
                    0
                }
            }
            _ => 2,
        };
        counts[cell] -= 1;
        counts[target] += 1;
    }

    let scale = 1.0 / (sellers as f64 * batch_len);
    let means: Vec<[f64; 4]> = batch
        .iter()
        .map(|b| std::array::from_fn(|c| b[c] * scale))
        .collect();
    let mut avg = [0.0; 4];
    let mut se = [0.0; 4];
    for c in 0..4 {
        let m = means.iter().map(|b| b[c]).sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|b| (b[c] - m).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        avg[c] = m;
        se[c] = (var / BATCHES as f64).sqrt();
    }
    Ok(PopulationSample {
        occupancy: SteadyState::from_array(avg, 1.0),
        std_error: se,
        sellers,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::steady_state;
    use crate::model::RawParams;

    fn params() -> MarketParams {
        MarketParams::new(RawParams {
            delta: 0.2,
            alpha: 0.6,
            u_high: 2.0,
            u_low: 1.0,
            price: 1.0,
            k: 0.8,
            buyer_mass: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn flows_converge_to_closed_form() {
        let p = params();
        let q = QueuePair::new(2.0, 0.5).unwrap();
        let init = SteadyState::from_array([1.0, 0.0, 0.0, 0.0], 1.0);
        let traj = integrate_flows(init, q, &p, 200.0 / p.delta(), default_step(q, &p)).unwrap();
        let exact = steady_state(q, &p, 1.0).unwrap();
        let end = traj.terminal();
        for (a, b) in end.as_array().iter().zip(exact.as_array()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(traj.terminal_residual < 1e-10);
        assert!(traj.states.len() <= MAX_SNAPSHOTS + 2);
        assert_eq!(*traj.times.last().unwrap(), 200.0 / p.delta());
    }

    #[test]
    fn flows_conserve_mass() {
        let p = params();
        let q = QueuePair::new(0.3, 4.0).unwrap();
        let init = SteadyState::from_array([0.1, 0.2, 0.3, 0.4], 1.0);
        let traj = integrate_flows(init, q, &p, 7.3, 0.05).unwrap();
        for s in &traj.states {
            assert!((s.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oversized_step_is_halved() {
        let p = params();
        let q = QueuePair::new(50.0, 50.0).unwrap();
        let init = SteadyState::from_array([0.0, 0.5, 0.5, 0.0], 1.0);
        let traj = integrate_flows(init, q, &p, 5.0, 5.0).unwrap();
        assert!(traj.states.iter().all(|s| s.as_array().iter().all(|&x| x >= 0.0)));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params();
        let q = QueuePair::new(1.0, 1.0).unwrap();
        let init = SteadyState::from_array([0.25; 4], 1.0);
        assert!(integrate_flows(init, q, &p, 1.0, 0.0).is_err());
        assert!(integrate_flows(init, q, &p, -1.0, 0.1).is_err());
        assert!(simulate_population(3, q, &p, 1.0, 0).is_err());
    }

    #[test]
    fn simulation_is_reproducible_and_close() {
        let p = params();
        let q = QueuePair::new(1.5, 0.4).unwrap();
        let a = simulate_population(2000, q, &p, 100.0 / p.delta(), 7).unwrap();
        let b = simulate_population(2000, q, &p, 100.0 / p.delta(), 7).unwrap();
        assert_eq!(a, b);
        let exact = steady_state(q, &p, 1.0).unwrap();
        for (x, y) in a.occupancy.as_array().iter().zip(exact.as_array()) {
            assert!((x - y).abs() < 0.02, "{x} vs {y}");
        }
        assert!((a.occupancy.total() - 1.0).abs() < 1e-9);
    }
}
