use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ratings_market::dynamics::{default_step, integrate_flows, simulate_population};
use ratings_market::mechanics::steady_state;
use ratings_market::{MarketParams, QueuePair, RawParams, SteadyState};

fn fig3() -> MarketParams {
    MarketParams::new(RawParams {
        delta: 0.2,
        alpha: 0.5,
        u_high: 3.0,
        u_low: 1.0,
        price: 1.5,
        k: 0.8204,
        buyer_mass: 0.08,
    })
    .unwrap()
}

fn dirichlet(rng: &mut ChaCha8Rng) -> SteadyState {
    let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.gen::<f64>()).ln());
    let t: f64 = e.iter().sum();
    SteadyState::from_array(e.map(|x| x / t), 1.0)
}

#[test]
fn steady_state_is_a_fixed_point() {
    let p = fig3();
    let q = QueuePair::new(1.549, 0.01106).unwrap();
    let s = steady_state(q, &p, 1.0).unwrap();
    let traj = integrate_flows(s, q, &p, 50.0, default_step(q, &p)).unwrap();
    assert!(traj.terminal_residual < 1e-10);
    for st in &traj.states {
        for (a, b) in st.as_array().iter().zip(s.as_array()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn without_trade_only_types_mix() {
    let p = fig3();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let init = dirichlet(&mut rng);
    let traj = integrate_flows(init, QueuePair::ZERO, &p, 200.0 / p.delta(), 0.05 / p.delta()).unwrap();
    let end = traj.terminal();
    assert!((end.g_mass() - init.g_mass()).abs() < 1e-12);
    assert!((end.b_mass() - init.b_mass()).abs() < 1e-12);
    assert!((end.p_hg - 0.5 * init.g_mass()).abs() < 1e-10);
    assert!((end.p_hb - 0.5 * init.b_mass()).abs() < 1e-10);
}

#[test]
fn random_starts_reach_closed_form() {
    let p = fig3();
    let q = QueuePair::new(1.549, 0.01106).unwrap();
    let exact = steady_state(q, &p, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let traj =
            integrate_flows(dirichlet(&mut rng), q, &p, 200.0 / p.delta(), default_step(q, &p)).unwrap();
        for (a, b) in traj.terminal().as_array().iter().zip(exact.as_array()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        for s in &traj.states {
            assert!((s.total() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn precise_ratings_separate_types() {
    let p = MarketParams::new(RawParams {
        alpha: 1.0,
        ..fig3().raw()
    })
    .unwrap();
    let q = QueuePair::new(200.0, 200.0).unwrap();
    let s = simulate_population(2000, q, &p, 50.0 / p.delta(), 3).unwrap();
    let b = s.occupancy.empirical_beliefs();
    assert!(b.mu_g > 0.95 && b.mu_b < 0.05, "{b:?}");
}

/// Batch-means standard errors shrink roughly like `1/√n`.
#[test]
fn monte_carlo_error_scales_with_population() {
    let p = fig3();
    let q = QueuePair::new(1.0, 0.3).unwrap();
    let se = |n: usize| {
        let s = simulate_population(n, q, &p, 200.0 / p.delta(), 17).unwrap();
        s.std_error.iter().sum::<f64>()
    };
    let (small, mid, large) = (se(1_000), se(10_000), se(100_000));
    for ratio in [small / mid, mid / large] {
        assert!((1.5..7.0).contains(&ratio), "ratio {ratio}, expected about 3.16");
    }
}

#[test]
fn trajectory_csv_has_header_and_rows() {
    let p = fig3();
    let q = QueuePair::new(1.0, 1.0).unwrap();
    let traj = integrate_flows(SteadyState::from_array([0.25; 4], 1.0), q, &p, 1.0, 0.1).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "time,p_hg,p_lg,p_hb,p_lb");
    assert_eq!(lines.count(), traj.times.len());
}
