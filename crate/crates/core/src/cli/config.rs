//! Experiment configs: `name = value` lines with `#` comments, or JSON when
//! the file name ends in `.json`.

use std::path::Path;

use super::CliError;
use crate::model::{validate_params, MarketParams, RawParams};

const KEYS: [&str; 7] = ["delta", "alpha", "u_high", "u_low", "price", "k", "buyer_mass"];

fn canonical(key: &str) -> Option<&'static str> {
    match key {
        "Q" | "q" => Some("buyer_mass"),
        "p" | "w" => Some("price"),
        "u_h" | "uH" => Some("u_high"),
        "u_l" | "uL" => Some("u_low"),
        _ => KEYS.iter().copied().find(|k| *k == key),
    }
}

/// Parses the key-value form.
pub fn parse_config(text: &str) -> Result<RawParams, CliError> {
    let mut values: [Option<f64>; 7] = [None; 7];
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("line {}: expected `name = value`", n + 1)))?;
        let key = key.trim();
        let name =
            canonical(key).ok_or_else(|| CliError::input(format!("line {}: unknown key `{key}`", n + 1)))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("line {}: `{}` is not a number", n + 1, value.trim())))?;
        let slot = KEYS.iter().position(|k| *k == name).expect("canonical key");
        if values[slot].replace(value).is_some() {
            return Err(CliError::input(format!("line {}: `{name}` given twice", n + 1)));
        }
    }
    let get = |i: usize| values[i].ok_or_else(|| CliError::input(format!("missing key `{}`", KEYS[i])));
    Ok(RawParams {
        delta: get(0)?,
        alpha: get(1)?,
        u_high: get(2)?,
        u_low: get(3)?,
        price: get(4)?,
        k: get(5)?,
        buyer_mass: get(6)?,
    })
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<MarketParams, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let raw = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
    } else {
        parse_config(&text)?
    };
    Ok(validate_params(&raw)?)
}
