//! Bracketing, bisection and grid helpers.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 400;

/// Bisection on `[lo, hi]` for a sign change of `f`.
///
/// Runs until the bracket cannot shrink further in floating point. On
/// strictly positive brackets spanning several octaves the geometric
/// midpoint is used, so wide log-scale brackets converge in few steps.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::BracketFailure {
            what: "bisection",
            lower: lo,
            upper: hi,
        });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = if lo > 0.0 && hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            lo + 0.5 * (hi - lo)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + 0.5 * (hi - lo))
}

/// Widens `[lo, hi]` geometrically until `f` changes sign, never leaving
/// `[floor, cap]`.
pub fn expand_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    floor: f64,
    cap: f64,
    what: &'static str,
) -> Result<(f64, f64)> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    loop {
        if f_lo.is_finite() && f_hi.is_finite() && f_lo.signum() != f_hi.signum() {
            return Ok((lo, hi));
        }
        if f_lo == 0.0 || f_hi == 0.0 {
            return Ok((lo, hi));
        }
        let can_lower = lo > floor;
        let can_raise = hi < cap;
        if !can_lower && !can_raise {
            return Err(Error::BracketFailure {
                what,
                lower: lo,
                upper: hi,
            });
        }
        if can_lower {
            lo = (lo * 1e-3).max(floor);
            f_lo = f(lo);
        }
        if can_raise {
            hi = (hi * 10.0).min(cap);
            f_hi = f(hi);
        }
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo);
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut v: Vec<f64> = (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect();
            v[0] = lo;
            v[n - 1] = hi;
            v
        }
    }
}

/// `n` linearly spaced points from `lo` to `hi` inclusive.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                (1.0 - t) * lo + t * hi
            })
            .collect(),
    }
}

/// Chebyshev-Lobatto nodes on `[lo, hi]`, ascending, endpoints included.
/// Nodes cluster quadratically near both ends.
pub fn lobatto_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / (n - 1) as f64;
            lo + (hi - lo) * 0.5 * (1.0 - t.cos())
        })
        .collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

/// Indices `i` such that `values[i]` and `values[i + 1]` bracket a root.
/// A sample that is exactly zero is reported once, through the cell it
/// starts.
pub fn sign_change_cells(values: &[f64]) -> Vec<usize> {
    let mut cells = Vec::new();
    for i in 0..values.len().saturating_sub(1) {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 || (a.signum() != b.signum() && b != 0.0) {
            cells.push(i);
        }
    }
    if let Some(&last) = values.last() {
        if last == 0.0 && values.len() >= 2 {
            cells.push(values.len() - 2);
        }
    }
    cells.dedup();
    cells
}

/// Golden-section minimisation of a unimodal `f` on `[a, b]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// All roots of `f` on a sampled grid: sign-change cells plus pairs of
/// roots hidden inside a cell pair around a local extremum that stays on one
/// side of zero at the samples.
pub fn grid_roots<F: FnMut(f64) -> f64>(mut f: F, xs: &[f64], values: &[f64]) -> Vec<f64> {
    let mut roots = Vec::new();
    for i in sign_change_cells(values) {
        if let Ok(r) = bisect(&mut f, xs[i], xs[i + 1]) {
            roots.push(r);
        }
    }
    for i in 1..values.len().saturating_sub(1) {
        let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
        let is_min = m < l && m <= r && m > 0.0 && l > 0.0 && r > 0.0;
        let is_max = m > l && m >= r && m < 0.0 && l < 0.0 && r < 0.0;
        if !(is_min || is_max) {
            continue;
        }
        let sign = if is_min { 1.0 } else { -1.0 };
        let (x_ext, f_ext) = golden_min(|x| sign * f(x), xs[i - 1], xs[i + 1]);
        if f_ext < 0.0 {
            for (a, b) in [(xs[i - 1], x_ext), (x_ext, xs[i + 1])] {
                if let Ok(r) = bisect(&mut f, a, b) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}
