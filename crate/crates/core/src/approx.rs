//! Weak-ℓ^p norms, non-increasing rearrangements and power-law rate fits for
//! N-term approximation.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::gramian::least_squares;

/// Non-increasing rearrangement c*_1 ≥ c*_2 ≥ … of |c|.
pub fn rearrangement(c: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = c.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// sup_n n^{1/p} c*_n.
pub fn weak_lp_norm(c: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(domain("weak-lp exponent must be positive"));
    }
    Ok(rearrangement(c)
        .iter()
        .enumerate()
        .map(|(i, &v)| libm::pow((i + 1) as f64, 1.0 / p) * v)
        .fold(0.0, f64::max))
}

/// (Σ |c|^p)^{1/p}.
pub fn lp_norm(c: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(domain("lp exponent must be positive"));
    }
    Ok(libm::pow(
        c.iter().map(|x| libm::pow(x.abs(), p)).sum::<f64>(),
        1.0 / p,
    ))
}

/// One row of an N-term approximation table.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateRow {
    pub n: usize,
    /// ‖f − f_N‖² by explicit synthesis.
    pub err2: f64,
    /// Energy of the discarded coefficients.
    pub tail2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateFit {
    pub exponent: f64,
    pub r2: f64,
    pub points: usize,
}

fn fit_log_log(points: impl Iterator<Item = (f64, f64)>, range: (f64, f64)) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = points
        .filter(|&(n, _)| n >= range.0 && n <= range.1)
        .collect();
    if pts.len() < 4 {
        return Err(Error::Insufficient(format!(
            "{} points in range, need 4",
            pts.len()
        )));
    }
    if pts.iter().any(|&(_, v)| !(v > 0.0)) {
        return Err(domain("rate fit needs positive values"));
    }
    let xs: Vec<f64> = pts.iter().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = pts.iter().map(|p| libm::log(p.1)).collect();
    let (_, slope, r2) = least_squares(&xs, &ys)?;
    Ok(RateFit {
        exponent: slope,
        r2,
        points: pts.len(),
    })
}

/// Slope of log err2 against log N over rows with N in `range`.
pub fn rate_fit(rows: &[RateRow], range: (f64, f64)) -> Result<RateFit> {
    fit_log_log(rows.iter().map(|r| (r.n as f64, r.err2)), range)
}

/// Sample positions for coefficient fits: 10 per decade, log-spaced, deduplicated.
pub fn log_spaced(lo: usize, hi: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if lo == 0 || hi < lo {
        return out;
    }
    let steps = libm::ceil(10.0 * libm::log10(hi as f64 / lo as f64)) as usize;
    for i in 0..=steps {
        let t = if steps == 0 {
            0.0
        } else {
            i as f64 / steps as f64
        };
        let n = libm::round(lo as f64 * libm::pow(hi as f64 / lo as f64, t)) as usize;
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    out
}

/// Slope of log c*_N against log N at log-spaced N in `range` (1-based ranks).
pub fn coefficient_fit(sorted: &[f64], range: (usize, usize)) -> Result<RateFit> {
    let hi = range.1.min(sorted.len());
    let ns = log_spaced(range.0.max(1), hi);
    fit_log_log(
        ns.iter().map(|&n| (n as f64, sorted[n - 1])),
        (range.0 as f64, hi as f64),
    )
}
