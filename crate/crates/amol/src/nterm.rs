//! N-term approximation curves through the digital transform.

use amol_core::approx::{rearrangement, RateRow};
use amol_core::frame::{CoefficientSet, CoefficientStore};
use amol_core::volume::SampledVolume;
use amol_core::{Error, Result};

use crate::transform::{Keep, Transform};

#[derive(Debug, Clone, PartialEq)]
pub struct NtermCurve {
    pub rows: Vec<RateRow>,
    /// Requested N that exceeded the coefficient count and were clamped.
    pub clamped: Vec<usize>,
    /// Non-increasing rearrangement of all coefficient magnitudes.
    pub ranked: Vec<f64>,
    pub energy: f64,
}

/// For each N: keep the N largest coefficients, synthesize, and measure
/// ‖f − f_N‖² together with the discarded energy.
pub fn nterm_curve(t: &Transform, f: &SampledVolume, ns: &[usize]) -> Result<NtermCurve> {
    if ns.is_empty() || ns.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Domain(
            "N values must be nonempty and strictly increasing".into(),
        ));
    }
    let all = t.analysis(f, Keep::All)?;
    let total = all.len();
    let ranked = rearrangement(&all.magnitudes());
    let mut suffix = vec![0.0; total + 1];
    for i in (0..total).rev() {
        suffix[i] = suffix[i + 1] + ranked[i] * ranked[i];
    }
    let clamped: Vec<usize> = ns.iter().copied().filter(|&n| n > total).collect();
    let mut wanted: Vec<usize> = ns.iter().map(|&n| n.min(total)).collect();
    wanted.dedup();
    let best = t.select_top(&all, *wanted.last().unwrap_or(&0))?;
    drop(all);
    let CoefficientStore::Sparse(entries) = &best.store else {
        unreachable!("select_top returns entries")
    };
    let mut rows = Vec::with_capacity(wanted.len());
    for &n in &wanted {
        let part = CoefficientSet {
            spec: best.spec,
            store: CoefficientStore::Sparse(entries[..n].to_vec()),
            truncated: n < total,
        };
        let err2 = f.distance_sqr(&t.synthesis(&part)?)?;
        rows.push(RateRow {
            n,
            err2,
            tail2: suffix[n],
        });
    }
    Ok(NtermCurve {
        rows,
        clamped,
        ranked,
        energy: f.energy(),
    })
}
