use serde::Serialize;

use super::CliError;
use crate::dynamics::{default_step, integrate_flows, simulate_population, PopulationSample};
use crate::mechanics::steady_state;
use crate::model::{MarketParams, QueuePair, RawParams, SteadyState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateOptions {
    pub lambda_g: f64,
    pub lambda_b: f64,
    pub sellers: usize,
    /// In units of `1/δ`.
    pub horizon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub params: RawParams,
    pub queues: QueuePair,
    pub horizon: f64,
    pub seed: u64,
    pub closed_form: SteadyState,
    pub flow_terminal: SteadyState,
    pub flow_terminal_residual: f64,
    pub population: PopulationSample,
    /// `|simulated - closed form| / standard error`, per cell.
    pub z_scores: [f64; 4],
}

/// Runs the flow integrator from equal masses and the population simulator
/// at the given queues. Returns the report and the trajectory as CSV.
pub fn simulate_report(
    params: &MarketParams,
    opts: &SimulateOptions,
) -> Result<(SimulateReport, String), CliError> {
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(CliError::input("horizon must be positive"));
    }
    let queues = QueuePair::new(opts.lambda_g, opts.lambda_b)?;
    let horizon = opts.horizon / params.delta();
    let closed_form = steady_state(queues, params, 1.0)?;
    let start = SteadyState::from_array([0.25; 4], 1.0);
    let traj = integrate_flows(start, queues, params, horizon, default_step(queues, params))?;
    let population = simulate_population(opts.sellers, queues, params, horizon, opts.seed)?;
    let exact = closed_form.as_array();
    let sim = population.occupancy.as_array();
    let z_scores = std::array::from_fn(|i| {
        let se = population.std_error[i];
        if se > 0.0 {
            (sim[i] - exact[i]).abs() / se
        } else {
            f64::INFINITY
        }
    });
    let mut csv = Vec::new();
    traj.write_csv(&mut csv).expect("writing to memory");
    Ok((
        SimulateReport {
            params: params.raw(),
            queues,
            horizon,
            seed: opts.seed,
            closed_form,
            flow_terminal: *traj.terminal(),
            flow_terminal_residual: traj.terminal_residual,
            population,
            z_scores,
        },
        String::from_utf8(csv).expect("CSV is ASCII"),
    ))
}
