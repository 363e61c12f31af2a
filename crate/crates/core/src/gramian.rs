//! Cross-Gramians of frame atoms: stratified pair sampling, envelope fits of the
//! decay against ω_α, and Schur-bound diagnostics over nested truncations.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::frame::{
    atom_center, atom_phase_matrix, index_set, inner_product, FrameSpec, WindowKey,
};
use crate::metric::{omega_alpha, schur_lp_bound};
use crate::parametrization::{sh_phase, ShearletIndex};

#[derive(Debug, Clone, PartialEq)]
pub struct GramianRow {
    pub a: ShearletIndex,
    pub b: ShearletIndex,
    pub value: Complex64,
    pub omega: f64,
}

/// Rows sorted by (a, b).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GramianTable {
    pub rows: Vec<GramianRow>,
}

impl GramianTable {
    pub fn from_rows(mut rows: Vec<GramianRow>) -> Self {
        rows.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        GramianTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Schur ℓ^p bound of the table read as a sparse matrix.
    pub fn schur_bound(&self, p: f64) -> Result<f64> {
        schur_lp_bound(
            self.rows
                .iter()
                .map(|r| (r.a.clone(), r.b.clone(), r.value.norm())),
            p,
        )
    }
}

/// ⟨ψ_a, ψ_b⟩ by quadrature together with ω_α of the frame parametrization.
pub fn gramian_row(
    spec: &FrameSpec,
    a: &ShearletIndex,
    b: &ShearletIndex,
    alpha: f64,
) -> Result<GramianRow> {
    let value = inner_product(spec, a, b)?;
    let omega = omega_alpha(&sh_phase(a)?, &sh_phase(b)?, alpha)?;
    Ok(GramianRow {
        a: a.clone(),
        b: b.clone(),
        value,
        omega,
    })
}

/// Sequential cross-Gramian over the given pairs.
pub fn cross_gramian(
    spec: &FrameSpec,
    pairs: &[(ShearletIndex, ShearletIndex)],
    alpha: f64,
) -> Result<GramianTable> {
    if pairs.is_empty() {
        return Err(Error::Insufficient("empty pair sample".into()));
    }
    let rows = pairs
        .iter()
        .map(|(a, b)| gramian_row(spec, a, b, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(GramianTable::from_rows(rows))
}

/// Pair sampler. Pair i falls in stratum i mod 27 of (scale gap |j−j′| ∈ {0,1,2}) ×
/// (same, neighbouring or unrelated shear) × (same, near or far center).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairSampler {
    pub count: usize,
    pub seed: u64,
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (uniform(rng) * n as f64) as usize % n.max(1)
}

pub fn sample_pairs(
    spec: &FrameSpec,
    sampler: &PairSampler,
) -> Result<Vec<(ShearletIndex, ShearletIndex)>> {
    if sampler.count == 0 {
        return Err(Error::Insufficient("pair count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let keys = index_set(spec.scales);
    let by_scale: Vec<Vec<WindowKey>> = (0..=spec.scales)
        .map(|j| keys.iter().filter(|k| k.j == j).copied().collect())
        .collect();
    let mut out = Vec::with_capacity(sampler.count);
    for i in 0..sampler.count {
        let stratum = i % 27;
        let gap = ((stratum / 9) as u32).min(spec.scales);
        let shear_rel = (stratum / 3) % 3;
        let shift_rel = stratum % 3;
        let ja = below(&mut rng, (spec.scales - gap + 1) as usize) as u32;
        let jb = ja + gap;
        let ka = by_scale[ja as usize][below(&mut rng, by_scale[ja as usize].len())];
        let candidates = &by_scale[jb as usize];
        let kb = match shear_rel {
            0 | 1 if ka.epsilon != 0 => {
                let f = 1i64 << gap;
                let jitter = if shear_rel == 1 {
                    [below(&mut rng, 3) as i64 - 1, below(&mut rng, 3) as i64 - 1]
                } else {
                    [0, 0]
                };
                let want = WindowKey::new(
                    ka.epsilon,
                    jb,
                    [ka.ell[0] * f + jitter[0], ka.ell[1] * f + jitter[1]],
                );
                if want.check().is_ok() {
                    want
                } else {
                    candidates[below(&mut rng, candidates.len())]
                }
            }
            _ => candidates[below(&mut rng, candidates.len())],
        };
        let k_a = [0, 1, 2].map(|_| below(&mut rng, 5) as i64 - 2);
        let a = ka.index(k_a);
        let xa = atom_center(&a)?;
        let scale = libm::ldexp(1.0, -(ja as i32));
        let r = match shift_rel {
            0 => 0.0,
            1 => (0.5 + 1.5 * uniform(&mut rng)) * scale,
            _ => (2.0 + 8.0 * uniform(&mut rng)) * scale,
        };
        let dir = {
            let g = [
                uniform(&mut rng) - 0.5,
                uniform(&mut rng) - 0.5,
                uniform(&mut rng) - 0.5,
            ];
            let n = libm::sqrt(g.iter().map(|v| v * v).sum::<f64>()).max(1e-12);
            g.map(|v| v / n)
        };
        let target = [xa[0] + r * dir[0], xa[1] + r * dir[1], xa[2] + r * dir[2]];
        let bt_inv = atom_phase_matrix(&kb)
            .transpose()
            .inverse()
            .ok_or_else(|| Error::Infeasible(format!("singular phase matrix for {kb:?}")))?;
        let kf = bt_inv.mul_vec(&target[..]);
        let b = kb.index([
            libm::round(kf[0]) as i64,
            libm::round(kf[1]) as i64,
            libm::round(kf[2]) as i64,
        ]);
        out.push((a, b));
    }
    Ok(out)
}

/// Envelope fit log|value| ≈ log C + slope · log ω.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFit {
    pub c: f64,
    pub slope: f64,
    pub r2: f64,
    /// Rows inside the ω range with nonzero value.
    pub rows: usize,
    pub bins: usize,
}

/// Bins per decade of ω for the envelope.
pub const BINS_PER_DECADE: f64 = 8.0;

/// Least squares through the bin maxima (8 log-bins per decade) of |value| over
/// rows with ω in [omega_min, omega_max] and value ≠ 0.
pub fn decay_fit(table: &GramianTable, omega_min: f64, omega_max: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| (r.omega, r.value.norm()))
        .collect();
    decay_fit_points(&pts, omega_min, omega_max)
}

/// [`decay_fit`] on raw (ω, |value|) pairs.
pub fn decay_fit_points(points: &[(f64, f64)], omega_min: f64, omega_max: f64) -> Result<DecayFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(w, v)| w >= omega_min && w <= omega_max && v > 0.0)
        .collect();
    if used.len() < 20 {
        return Err(Error::Insufficient(format!(
            "{} rows in range, need 20",
            used.len()
        )));
    }
    let mut bins: alloc::collections::BTreeMap<i64, (f64, f64)> =
        alloc::collections::BTreeMap::new();
    for &(w, v) in &used {
        let b = libm::floor(libm::log10(w) * BINS_PER_DECADE) as i64;
        let e = bins.entry(b).or_insert((w, v));
        if v > e.1 {
            *e = (w, v);
        }
    }
    if bins.len() < 2 {
        return Err(Error::Insufficient(
            "envelope needs at least two omega bins".into(),
        ));
    }
    let xs: Vec<f64> = bins.values().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = bins.values().map(|p| libm::log(p.1)).collect();
    let (intercept, slope, r2) = least_squares(&xs, &ys)?;
    Ok(DecayFit {
        c: libm::exp(intercept),
        slope,
        r2,
        rows: used.len(),
        bins: bins.len(),
    })
}

/// Ordinary least squares y ≈ a + b x; returns (a, b, r²).
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Insufficient("need two or more points".into()));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(domain("degenerate abscissae"));
    }
    let b = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok((my - b * mx, b, r2))
}

/// Schur bounds over nested truncations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchurDiagnostic {
    pub p: f64,
    pub bounds: Vec<f64>,
    /// Last two levels differ by less than 5%.
    pub stable: bool,
}

/// Schur ℓ^p bound per truncation level; `levels` are nested sparse Gramians.
pub fn sparsity_equiv_diag<K: Ord + Clone>(
    levels: &[Vec<(K, K, f64)>],
    p: f64,
) -> Result<SchurDiagnostic> {
    if levels.len() < 2 {
        return Err(Error::Insufficient(
            "need at least two truncation levels".into(),
        ));
    }
    let bounds = levels
        .iter()
        .map(|l| schur_lp_bound(l.iter().cloned(), p))
        .collect::<Result<Vec<_>>>()?;
    SchurDiagnostic::from_bounds(p, bounds)
}

impl SchurDiagnostic {
    /// Wraps bounds that were computed elsewhere (e.g. row sums of a digital Gramian).
    pub fn from_bounds(p: f64, bounds: Vec<f64>) -> Result<Self> {
        let n = bounds.len();
        if n < 2 {
            return Err(Error::Insufficient(
                "need at least two truncation levels".into(),
            ));
        }
        let stable = (bounds[n - 1] - bounds[n - 2]).abs() < 0.05 * bounds[n - 2].abs();
        Ok(SchurDiagnostic { p, bounds, stable })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn synthetic_power_laws() {
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|i| 1.0 + i as f64)
            .map(|w| (w, libm::pow(w, -3.0)))
            .collect();
        let f = decay_fit_points(&pts, 1.0, 1e9).unwrap();
        assert!((f.slope + 3.0).abs() < 1e-6 && (f.c - 1.0).abs() < 1e-6);
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|i| 1.0 + i as f64)
            .map(|w| (w, 5.0 / (w * w)))
            .collect();
        let f = decay_fit_points(&pts, 1.0, 1e9).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-6 && (f.c - 5.0).abs() < 1e-6);
        assert!(f.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn envelope_ignores_points_below_it() {
        let mut pts: Vec<(f64, f64)> = (0..100)
            .map(|i| 2.0 + i as f64)
            .map(|w| (w, libm::pow(w, -2.0)))
            .collect();
        pts.extend(
            (0..100)
                .map(|i| 2.0 + i as f64)
                .map(|w| (w, 1e-3 * libm::pow(w, -5.0))),
        );
        let f = decay_fit_points(&pts, 1.0, 1e9).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-6);
    }

    #[test]
    fn too_few_rows() {
        let pts = vec![(5.0, 1.0); 19];
        assert!(decay_fit_points(&pts, 1.0, 10.0).is_err());
    }

    #[test]
    fn schur_diagnostics() {
        let id = |n: i32| (0..n).map(|i| (i, i, 1.0)).collect::<Vec<_>>();
        let d = sparsity_equiv_diag(&[id(5), id(10)], 1.0).unwrap();
        assert_eq!(d.bounds, vec![1.0, 1.0]);
        assert!(d.stable);
        let scaled: Vec<_> = id(10)
            .into_iter()
            .map(|(a, b, v)| (a, b, 2.0 * v))
            .collect();
        assert_eq!(
            sparsity_equiv_diag(&[id(5), scaled], 1.0).unwrap().bounds[1],
            2.0
        );
        assert!(sparsity_equiv_diag(&[id(5)], 1.0).is_err());
    }

    #[test]
    fn diagonal_rows_have_unit_omega() {
        let spec = FrameSpec::new(64, 2).unwrap();
        let a = WindowKey::new(2, 1, [1, -1]).index([1, 0, 2]);
        let r = gramian_row(&spec, &a, &a, 0.5).unwrap();
        assert_eq!(r.omega, 1.0);
        assert_eq!(r.value, inner_product(&spec, &a, &a).unwrap());
    }

    #[test]
    fn sampler_is_deterministic_and_stratified() {
        let spec = FrameSpec::new(64, 2).unwrap();
        let s = PairSampler { count: 54, seed: 7 };
        let p1 = sample_pairs(&spec, &s).unwrap();
        assert_eq!(p1, sample_pairs(&spec, &s).unwrap());
        let gaps: Vec<u32> = p1.iter().map(|(a, b)| a.j.abs_diff(b.j)).collect();
        for g in 0..3 {
            assert!(gaps.contains(&g));
        }
        assert!(sample_pairs(&spec, &PairSampler { count: 0, seed: 0 }).is_err());
    }
}
