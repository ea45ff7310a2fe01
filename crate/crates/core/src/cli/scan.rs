use rayon::prelude::*;

use super::report::{analyse, thresholds};
use super::{fmt_num, fmt_opt, CliError};
use crate::error::Error;
use crate::model::{EquilibriumKind, MarketParams, StabilityLabel};
use crate::roots::{lin_grid, log_grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    K,
    BuyerMass,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub end: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match (self.count, self.spacing) {
            (1, _) => vec![self.start],
            (n, Spacing::Lin) => lin_grid(self.start, self.end, n),
            (n, Spacing::Log) => log_grid(self.start, self.end, n),
        }
    }
}

/// Parses `name=start:end:count[:lin|log]`, comma-separated, one or two
/// axes over `k`, `Q` and `beta`.
pub fn parse_grid(spec: &str) -> Result<Vec<Axis>, CliError> {
    let bad = |part: &str, why: &str| CliError::input(format!("bad axis `{part}`: {why}"));
    let mut axes: Vec<Axis> = Vec::new();
    for part in spec.split(',').map(str::trim) {
        let (name, range) = part
            .split_once('=')
            .ok_or_else(|| bad(part, "expected name=start:end:count"))?;
        let name = match name.trim() {
            "k" => AxisName::K,
            "Q" | "q" | "buyer_mass" => AxisName::BuyerMass,
            "beta" => AxisName::Beta,
            other => return Err(bad(part, &format!("unknown axis `{other}`"))),
        };
        let fields: Vec<&str> = range.split(':').map(str::trim).collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(bad(part, "expected start:end:count[:lin|log]"));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(part, &format!("`{s}` is not a finite number")))
        };
        let (start, end) = (num(fields[0])?, num(fields[1])?);
        let count: usize = fields[2]
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| bad(part, "count must be a positive integer"))?;
        let spacing = match fields.get(3).copied() {
            None | Some("lin") => Spacing::Lin,
            Some("log") => Spacing::Log,
            Some(s) => return Err(bad(part, &format!("unknown spacing `{s}`"))),
        };
        if spacing == Spacing::Log && !(start > 0.0 && end > 0.0) {
            return Err(bad(part, "log spacing needs positive bounds"));
        }
        if axes.iter().any(|a| a.name == name) {
            return Err(bad(part, "axis given twice"));
        }
        axes.push(Axis {
            name,
            start,
            end,
            count,
            spacing,
        });
    }
    if axes.len() > 2 {
        return Err(CliError::input("at most two axes"));
    }
    Ok(axes)
}

const HEADER: &str = "k,buyer_mass,beta,delta,alpha,trade,n_no_trade,n_nondiscriminatory,\
n_discriminatory,n_stable,n_unstable,n_not_assessed,k_threshold,lambda_g_lower,lambda_g_upper,\
q_lower,q_upper,beta_lower,beta_upper,status";

fn apply(params: &MarketParams, axis: AxisName, value: f64) -> Result<MarketParams, Error> {
    match axis {
        AxisName::K => params.with_k(value),
        AxisName::BuyerMass => params.with_buyer_mass(value),
        AxisName::Beta => params.with_beta(value),
    }
}

fn status(e: &Error) -> String {
    match e {
        Error::MultipleEquilibria { .. } => "multiple_equilibria".into(),
        Error::NoEquilibrium { .. } => "no_equilibrium".into(),
        other => other.to_string().replace(',', ";"),
    }
}

fn row(p: &MarketParams) -> Result<String, Error> {
    let a = analyse(p)?;
    let t = thresholds(p)?;
    let fields = [
        fmt_num(p.k()),
        fmt_num(p.buyer_mass()),
        fmt_num(p.beta()),
        fmt_num(p.delta()),
        fmt_num(p.alpha()),
        u8::from(!crate::equilibrium::no_trade(p)).to_string(),
        a.count(EquilibriumKind::NoTrade).to_string(),
        a.count(EquilibriumKind::NonDiscriminatory).to_string(),
        a.count(EquilibriumKind::Discriminatory).to_string(),
        a.count_stability(StabilityLabel::Stable).to_string(),
        a.count_stability(StabilityLabel::Unstable).to_string(),
        a.count_stability(StabilityLabel::NotAssessed).to_string(),
        fmt_opt(t.k_threshold),
        fmt_opt(t.lambda_g_lower),
        fmt_opt(t.lambda_g_upper),
        fmt_opt(t.q_lower),
        fmt_opt(t.q_upper),
        fmt_opt(t.beta_lower),
        fmt_opt(t.beta_upper),
        a.stability_error.as_ref().map_or_else(|| "ok".into(), status),
    ];
    Ok(fields.join(","))
}

/// One CSV row per grid point; the first axis varies slowest.
pub fn scan_csv(base: &MarketParams, axes: &[Axis]) -> Result<String, CliError> {
    let mut points = vec![*base];
    for axis in axes {
        let values = axis.points();
        points = points
            .iter()
            .flat_map(|p| values.iter().map(move |&v| apply(p, axis.name, v)))
            .collect::<Result<Vec<_>, Error>>()?;
    }
    let rows = points
        .par_iter()
        .map(row)
        .collect::<Result<Vec<String>, Error>>()?;
    let mut out = String::with_capacity(HEADER.len() + 1 + rows.len() * 256);
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}
