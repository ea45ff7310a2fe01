//! Curve data for the three reference figures.

use serde_json::{json, Value};

use super::{fmt_num, to_json, CliError};
use crate::equilibrium::{bi_curve, mc_curve, DiscriminatoryMap, NonDiscriminatorySolver};
use crate::error::Result;
use crate::mechanics::{k_threshold, u_b, u_g, ug_increasing_interval};
use crate::model::{MarketParams, RawParams};
use crate::roots::{bisect, log_grid, sign_change_cells};

pub const SAMPLES: usize = 512;

type Files = Vec<(String, String)>;

fn params(delta: f64, alpha: f64, u_high: f64, u_low: f64, price: f64, k: f64, q: f64) -> MarketParams {
    MarketParams::new(RawParams {
        delta,
        alpha,
        u_high,
        u_low,
        price,
        k,
        buyer_mass: q,
    })
    .expect("figure parameters are valid")
}

pub fn figure1_params(right: bool) -> MarketParams {
    params(0.1, 0.1, 2.0, 1.0, 1.0, if right { 0.8828 } else { 0.7682 }, 1.0)
}

pub fn figure2_params(right: bool, q: f64) -> MarketParams {
    params(1.0, 0.1, 2.0, 1.0, 1.0, if right { 0.9121 } else { 0.8682 }, q)
}

pub fn figure3_params() -> MarketParams {
    params(0.2, 0.5, 3.0, 1.0, 1.5, 0.8204, 1.0)
}

/// Emits every file for figure `id` as `(file name, contents)`.
pub fn figure_data(id: u32) -> std::result::Result<Files, CliError> {
    match id {
        1 => Ok(figure1()?),
        2 => Ok(figure2()?),
        3 => Ok(figure3()?),
        _ => Err(CliError::input(format!(
            "unknown figure {id}; expected 1, 2 or 3"
        ))),
    }
}

fn figure1() -> Result<Files> {
    let xs = log_grid(1e-2, 1e2, SAMPLES);
    let mut files = Vec::new();
    let mut panels = serde_json::Map::new();
    for (panel, right) in [("left", false), ("right", true)] {
        let p = figure1_params(right);
        let ys: Vec<f64> = xs.iter().map(|&x| u_g(x, &p)).collect();
        let mut csv = String::from("lambda_g,u_g\n");
        for (x, y) in xs.iter().zip(&ys) {
            csv.push_str(&format!("{},{}\n", fmt_num(*x), fmt_num(*y)));
        }
        files.push((format!("fig1_{panel}.csv"), csv));

        let slopes: Vec<f64> = ys.windows(2).map(|w| w[1] - w[0]).collect();
        let extrema: Vec<f64> = sign_change_cells(&slopes)
            .into_iter()
            .map(|i| {
                // The slope changes sign between the midpoints of two cells.
                let f = |x: f64| crate::mechanics::u_g_slope(x, &p);
                bisect(f, xs[i], xs[i + 2])
            })
            .collect::<Result<_>>()?;
        let analytic = ug_increasing_interval(&p)?;
        panels.insert(
            panel.into(),
            json!({
                "params": p.raw(),
                "increasing_interval": analytic.map(|(a, b)| [a, b]),
                "extrema": extrema,
            }),
        );
    }
    let meta = json!({
        "k_threshold": k_threshold(&figure1_params(false))?,
        "lambda_range": [1e-2, 1e2],
        "samples": SAMPLES,
        "panels": Value::Object(panels),
    });
    files.push(("fig1_meta.json".into(), to_json(&meta)));
    Ok(files)
}

/// Range of buyer masses with three non-discriminatory equilibria, read off
/// the interior extrema of the clearing mass along the indifference curve.
pub fn three_equilibrium_range(solver: &NonDiscriminatorySolver) -> Option<(f64, f64)> {
    let c: Vec<f64> = solver.table().map(|(_, _, c)| c).collect();
    let diffs: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    let turns = sign_change_cells(&diffs);
    if turns.len() < 2 {
        return None;
    }
    let vals: Vec<f64> = turns.iter().map(|&i| c[i + 1]).collect();
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Some((lo, hi))
}

fn figure2() -> Result<Files> {
    let xs = log_grid(1e-3, 1e3, SAMPLES);
    let mut files = Vec::new();
    let mut panels = serde_json::Map::new();
    for (panel, right) in [("left", false), ("right", true)] {
        let base = figure2_params(right, 1.0);
        let solver = NonDiscriminatorySolver::new(&base)?;
        let range = three_equilibrium_range(&solver);
        let (q, source) = match (right, range) {
            (true, Some((lo, hi))) => (0.5 * (lo + hi), "midpoint of three-equilibrium range"),
            _ => (1.0, "fixed"),
        };
        let p = base.with_buyer_mass(q)?;
        let mut csv = String::from("lambda_g,lambda_b_bi,lambda_b_mc\n");
        for &x in &xs {
            let bi = bi_curve(x, &p)?;
            let mc = mc_curve(x, q, &p, 1.0)?;
            csv.push_str(&format!("{},{},{}\n", fmt_num(x), fmt_num(bi), fmt_num(mc)));
        }
        files.push((format!("fig2_{panel}.csv"), csv));
        let crossings: Vec<[f64; 2]> = solver
            .solve(q)?
            .iter()
            .map(|e| [e.queues.group1.lambda_g, e.queues.group1.lambda_b])
            .collect();
        panels.insert(
            panel.into(),
            json!({
                "params": p.raw(),
                "buyer_mass": q,
                "buyer_mass_source": source,
                "three_equilibrium_range": range.map(|(a, b)| [a, b]),
                "equilibria": crossings,
            }),
        );
    }
    let meta = json!({
        "lambda_range": [1e-3, 1e3],
        "samples": SAMPLES,
        "panels": Value::Object(panels),
    });
    files.push(("fig2_meta.json".into(), to_json(&meta)));
    Ok(files)
}

fn figure3() -> Result<Files> {
    let p = figure3_params();
    let map = DiscriminatoryMap::new(&p)?.expect("figure 3 has a branch band");
    let band = *map.band();
    let xs = log_grid(1e-3, 1e2, SAMPLES);
    let mut csv = String::from("lambda_g,lambda_b_bi,u_g,branch,lambda_b_lower,lambda_b_upper\n");
    for &x in &xs {
        let branch = if x <= band.lambda_g_lower {
            1
        } else if x < band.lambda_g_upper {
            2
        } else {
            3
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_num(x),
            fmt_num(bi_curve(x, &p)?),
            fmt_num(u_g(x, &p)),
            branch,
            fmt_num(band.lambda_b_lower),
            fmt_num(band.lambda_b_upper),
        ));
    }
    let iv = map.q_interval();
    let meta = json!({
        "params": p.raw(),
        "k_threshold": k_threshold(&p)?,
        "lambda_range": [1e-3, 1e2],
        "samples": SAMPLES,
        "lambda_g_lower": band.lambda_g_lower,
        "lambda_g_upper": band.lambda_g_upper,
        "lambda_b_lower": band.lambda_b_lower,
        "lambda_b_upper": band.lambda_b_upper,
        "endpoints": {
            "u_b_at_lambda_b_upper": u_b(band.lambda_b_upper, &p),
            "u_g_at_lambda_g_lower": u_g(band.lambda_g_lower, &p),
            "u_b_at_lambda_b_lower": u_b(band.lambda_b_lower, &p),
            "u_g_at_lambda_g_upper": u_g(band.lambda_g_upper, &p),
        },
        "q_interval": [iv.lower, iv.upper],
        "q_interval_connected": iv.connected,
        "pair_ranges": iv.pair_ranges.iter().map(|r| [r.0, r.1]).collect::<Vec<_>>(),
    });
    Ok(vec![
        ("fig3.csv".into(), csv),
        ("fig3_meta.json".into(), to_json(&meta)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(csv: &str, idx: usize) -> Vec<f64> {
        csv.lines()
            .skip(1)
            .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
            .collect()
    }

    #[test]
    fn unknown_figure() {
        assert_eq!(figure_data(4).unwrap_err().code, 2);
    }

    #[test]
    fn figure2_crossings() {
        let files = figure2().unwrap();
        for (name, want) in [("fig2_left.csv", 1), ("fig2_right.csv", 3)] {
            let csv = &files.iter().find(|(n, _)| n == name).unwrap().1;
            let (bi, mc) = (column(csv, 1), column(csv, 2));
            assert_eq!(bi.len(), SAMPLES);
            let d: Vec<f64> = bi.iter().zip(&mc).map(|(a, b)| a - b).collect();
            assert_eq!(sign_change_cells(&d).len(), want, "{name}");
        }
    }

    #[test]
    fn figure3_band_and_endpoints() {
        let files = figure3().unwrap();
        let csv = &files[0].1;
        let (lo, hi) = (column(csv, 4)[0], column(csv, 5)[0]);
        assert!(0.0 < lo && lo < hi);
        let meta: Value = serde_json::from_str(&files[1].1).unwrap();
        let e = &meta["endpoints"];
        let close = |a: &str, b: &str| {
            let (x, y) = (e[a].as_f64().unwrap(), e[b].as_f64().unwrap());
            assert!((x - y).abs() < 1e-10 * x.abs(), "{a} {x} vs {b} {y}");
        };
        close("u_b_at_lambda_b_upper", "u_g_at_lambda_g_lower");
        close("u_b_at_lambda_b_lower", "u_g_at_lambda_g_upper");
        let branches = column(csv, 3);
        assert!([1.0, 2.0, 3.0].iter().all(|b| branches.contains(b)));
    }
}
