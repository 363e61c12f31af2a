//! The α-scaled index distance ω_α, (α,k)-consistency sums and the Schur ℓ^p bound.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::geometry::{project_angle, sphere_distance};
use crate::linalg::{dot, Mat};
use crate::parametrization::{shearlet_lattice, PhaseLattice, PhasePoint, SamplingData};

/// A sampled pair with its distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSample {
    pub lambda: PhasePoint,
    pub mu: PhasePoint,
    pub omega: f64,
}

fn check_dims(p: &PhasePoint, q: &PhasePoint) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(())
}

/// s_0^{2α}|Δx|² + s_0^{2(1−α)}{d_𝕊(e_p, e_q)}² + s_0|⟨e_p, Δx⟩|, s_0 = min(s_p, s_q).
pub fn d_alpha(p: &PhasePoint, q: &PhasePoint, alpha: f64) -> Result<f64> {
    check_dims(p, q)?;
    let s0 = p.s.min(q.s);
    let dx: Vec<f64> = p.x.iter().zip(&q.x).map(|(a, b)| a - b).collect();
    let theta = project_angle(sphere_distance(&p.e, &q.e)?);
    Ok(libm::pow(s0, 2.0 * alpha) * dot(&dx, &dx)
        + libm::pow(s0, 2.0 * (1.0 - alpha)) * theta * theta
        + s0 * dot(p.e.coords(), &dx).abs())
}

/// max(s_p/s_q, s_q/s_p) · (1 + d_α(p, q)).
pub fn omega_alpha(p: &PhasePoint, q: &PhasePoint, alpha: f64) -> Result<f64> {
    let d = d_alpha(p, q, alpha)?;
    Ok((p.s / q.s).max(q.s / p.s) * (1.0 + d))
}

/// max(sup_row Σ_col |M|^q, sup_col Σ_row |M|^q)^{1/q} with q = min(1, p).
/// Entries are (row, column, |value|); repeated keys accumulate.
pub fn schur_lp_bound<K: Ord + Clone>(
    entries: impl IntoIterator<Item = (K, K, f64)>,
    p: f64,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(domain("p must be positive"));
    }
    let q = p.min(1.0);
    let mut rows: BTreeMap<K, f64> = BTreeMap::new();
    let mut cols: BTreeMap<K, f64> = BTreeMap::new();
    for (r, c, v) in entries {
        let w = libm::pow(v.abs(), q);
        *rows.entry(r).or_default() += w;
        *cols.entry(c).or_default() += w;
    }
    let m = rows
        .values()
        .chain(cols.values())
        .fold(0.0f64, |a, &b| a.max(b));
    Ok(libm::pow(m, 1.0 / q))
}

/// One truncation level: scales j ≤ j_max and translations |k|_∞ ≤ k_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Truncation {
    pub j_max: u32,
    pub k_max: i64,
}

/// Partial sum Σ_λ ω(λ, μ)^{−k} for one probe μ, with a bound on the mass of
/// skipped terms (each skipped term is below the configured floor).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProbeSum {
    pub sum: f64,
    pub skipped_mass: f64,
}

/// A parametrized index family that can be summed against a probe point.
pub trait IndexFamily: Sync {
    fn dim(&self) -> usize;
    /// Σ over the truncated family of ω_α(λ, μ)^{−k}; terms provably below `floor` may be skipped.
    fn sum_against(
        &self,
        mu: &PhasePoint,
        level: Truncation,
        alpha: f64,
        k: f64,
        floor: f64,
    ) -> ProbeSum;
    /// Deterministic stratified probe points of the truncated family.
    fn probes(&self, level: Truncation) -> Vec<PhasePoint>;
}

/// An explicit finite list of phase points (truncation is ignored).
#[derive(Debug, Clone, PartialEq)]
pub struct PointFamily(pub Vec<PhasePoint>);

impl IndexFamily for PointFamily {
    fn dim(&self) -> usize {
        self.0.first().map_or(0, PhasePoint::dim)
    }

    fn sum_against(&self, mu: &PhasePoint, _: Truncation, alpha: f64, k: f64, _: f64) -> ProbeSum {
        let sum = self
            .0
            .iter()
            .map(|l| neg_pow(omega_alpha(l, mu, alpha).expect("equal dimensions"), k))
            .sum();
        ProbeSum {
            sum,
            skipped_mass: 0.0,
        }
    }

    fn probes(&self, _: Truncation) -> Vec<PhasePoint> {
        self.0.clone()
    }
}

fn neg_pow(x: f64, k: f64) -> f64 {
    if k == libm::round(k) && k.abs() < 64.0 {
        // Square-and-multiply: much cheaper than pow in the consistency sums.
        let (mut r, mut b, mut e) = (1.0, x, k.abs() as u32);
        while e > 0 {
            if e & 1 == 1 {
                r *= b;
            }
            b *= b;
            e >>= 1;
        }
        if k >= 0.0 {
            1.0 / r
        } else {
            r
        }
    } else {
        libm::pow(x, -k)
    }
}

/// One (ε, j, ℓ) of a shearlet parametrization.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeWindow {
    pub epsilon: usize,
    pub j: u32,
    pub ell: Vec<i64>,
    pub lattice: PhaseLattice,
}

/// The shearlet parametrization Φ^s of some sampling data, as lattice windows.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearletFamily {
    pub data: SamplingData,
}

impl ShearletFamily {
    pub fn windows(&self, j_max: u32) -> Vec<LatticeWindow> {
        let d = self.data.dim();
        let mut out = Vec::new();
        for j in 0..=j_max {
            for epsilon in 0..=d {
                if epsilon == 0 && j > 0 {
                    continue;
                }
                for ell in self.data.shear_set(epsilon, j) {
                    let lattice = shearlet_lattice(epsilon, j, &ell, &self.data, &self.data.tau);
                    out.push(LatticeWindow {
                        epsilon,
                        j,
                        ell,
                        lattice,
                    });
                }
            }
        }
        out
    }
}

impl IndexFamily for ShearletFamily {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn sum_against(
        &self,
        mu: &PhasePoint,
        level: Truncation,
        alpha: f64,
        k: f64,
        floor: f64,
    ) -> ProbeSum {
        let mut acc = ProbeSum::default();
        for w in self.windows(level.j_max) {
            let s = lattice_sum(&w.lattice, mu, level.k_max, alpha, k, floor);
            acc.sum += s.sum;
            acc.skipped_mass += s.skipped_mass;
        }
        acc
    }

    /// Every scale and pyramid; the lexicographically first, central and last
    /// shear; translation at the origin and at the corner of the box.
    fn probes(&self, level: Truncation) -> Vec<PhasePoint> {
        let d = self.data.dim();
        let mut out = Vec::new();
        let mut pick = |ws: &[LatticeWindow]| {
            if ws.is_empty() {
                return;
            }
            let mut chosen = vec![0, ws.len() / 2, ws.len() - 1];
            chosen.dedup();
            for i in chosen {
                for corner in [0.0, level.k_max as f64] {
                    out.push(ws[i].lattice.point(&vec![corner; d]));
                }
            }
        };
        let all = self.windows(level.j_max);
        for j in 0..=level.j_max {
            for epsilon in 0..=d {
                let group: Vec<LatticeWindow> = all
                    .iter()
                    .filter(|w| w.j == j && w.epsilon == epsilon)
                    .cloned()
                    .collect();
                pick(&group);
            }
        }
        out
    }
}

/// Σ_{|k|_∞ ≤ K} ω(λ_k, μ)^{−k} over one lattice window. Translations whose
/// quadratic lower bound r(1 + s_0^{2(1−α)}θ² + s_0^{2α}|Δx|²) already exceeds
/// floor^{−1/k} are skipped by an ordered enumeration over the Cholesky factor of
/// the lattice basis, and counted in `skipped_mass` at `floor` each.
pub fn lattice_sum(
    l: &PhaseLattice,
    mu: &PhasePoint,
    k_max: i64,
    alpha: f64,
    k: f64,
    floor: f64,
) -> ProbeSum {
    let d = mu.dim();
    let r = (l.s / mu.s).max(mu.s / l.s);
    let s0 = l.s.min(mu.s);
    let theta = project_angle(sphere_distance(&l.e, &mu.e).expect("equal dimensions"));
    let ang = libm::pow(s0, 2.0 * (1.0 - alpha)) * theta * theta;
    let c2 = libm::pow(s0, 2.0 * alpha);
    let total = libm::pow((2 * k_max + 1) as f64, d as f64);
    let omega_cut = if floor > 0.0 {
        libm::pow(floor, -1.0 / k)
    } else {
        f64::INFINITY
    };
    let budget = (omega_cut / r - 1.0 - ang) / c2;
    if !(budget >= 0.0) {
        return ProbeSum {
            sum: 0.0,
            skipped_mass: total * floor,
        };
    }
    let v: Vec<f64> = mu.x.iter().zip(&l.offset).map(|(a, b)| a - b).collect();
    let chol = upper_cholesky(&(&l.basis.transpose() * &l.basis));
    let btv = l.basis.transpose().mul_vec(&v);
    // w = R^{-T} Bᵀ v by forward substitution (Rᵀ is lower triangular).
    let mut w = vec![0.0; d];
    for i in 0..d {
        let s: f64 = (0..i).map(|m| chol[(m, i)] * w[m]).sum();
        w[i] = (btv[i] - s) / chol[(i, i)];
    }
    let g = l.basis.transpose().mul_vec(l.e.coords());
    let g0 = -dot(l.e.coords(), &v);
    let mut st = Enum {
        chol: &chol,
        w: &w,
        g: &g,
        k_max,
        k: vec![0i64; d],
        sum: 0.0,
        visited: 0.0,
        r,
        ang,
        c2,
        c1: s0,
        g0,
        kexp: k,
        budget: if budget.is_finite() { budget } else { f64::MAX },
    };
    st.level(d - 1, 0.0);
    ProbeSum {
        sum: st.sum,
        skipped_mass: (total - st.visited) * floor,
    }
}

struct Enum<'a> {
    chol: &'a Mat,
    w: &'a [f64],
    g: &'a [f64],
    k_max: i64,
    k: Vec<i64>,
    sum: f64,
    visited: f64,
    r: f64,
    ang: f64,
    c2: f64,
    c1: f64,
    g0: f64,
    kexp: f64,
    budget: f64,
}

impl Enum<'_> {
    fn level(&mut self, m: usize, partial: f64) {
        let d = self.k.len();
        let rmm = self.chol[(m, m)];
        let c = self.w[m]
            - (m + 1..d)
                .map(|l| self.chol[(m, l)] * self.k[l] as f64)
                .sum::<f64>();
        let rem = self.budget - partial;
        if rem < 0.0 {
            return;
        }
        let h = libm::sqrt(rem);
        let lo = libm::ceil((c - h) / rmm).max(-self.k_max as f64) as i64;
        let hi = libm::floor((c + h) / rmm).min(self.k_max as f64) as i64;
        for km in lo..=hi {
            self.k[m] = km;
            let t = rmm * km as f64 - c;
            let p = partial + t * t;
            if m == 0 {
                let along: f64 = self.g0
                    + self
                        .g
                        .iter()
                        .zip(&self.k)
                        .map(|(a, &b)| a * b as f64)
                        .sum::<f64>();
                let omega = self.r * (1.0 + self.c2 * p + self.ang + self.c1 * along.abs());
                self.sum += neg_pow(omega, self.kexp);
                self.visited += 1.0;
            } else {
                self.level(m - 1, p);
            }
        }
    }
}

/// Upper-triangular R with RᵀR = G for symmetric positive definite G.
fn upper_cholesky(g: &Mat) -> Mat {
    let n = g.dim();
    let mut r = Mat::zeros(n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..i).map(|m| r[(m, i)] * r[(m, j)]).sum();
            if i == j {
                r[(i, i)] = libm::sqrt((g[(i, i)] - s).max(0.0));
            } else {
                r[(i, j)] = (g[(i, j)] - s) / r[(i, i)];
            }
        }
    }
    r
}

/// Result of [`consistency_sum`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConsistencyReport {
    pub k: f64,
    pub alpha: f64,
    /// Estimate at the finest level, plus the geometric tail when converged.
    pub sup_estimate: f64,
    /// Sup-estimate per truncation level.
    pub levels: Vec<f64>,
    /// Differences between consecutive levels.
    pub increments: Vec<f64>,
    pub converged: bool,
    /// Upper bound on the mass of terms skipped below the floor, at the finest level.
    pub skipped_mass: f64,
    pub probes: usize,
}

/// Configuration of [`consistency_sum`]. `floor` = 0 sums every term exactly.
///
/// The run counts as converged when the last two increments contract and the
/// geometric tail they predict is at most `tail_tol` times the finest level.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyConfig {
    pub alpha: f64,
    pub k: f64,
    pub levels: Vec<Truncation>,
    pub floor: f64,
    pub tail_tol: f64,
}

impl ConsistencyConfig {
    /// Doubling levels `(j, 2^{j−1})` (at least 1) for `j` in `j_min..=j_max`.
    pub fn doubling(alpha: f64, k: f64, j_min: u32, j_max: u32) -> Self {
        let levels = (j_min..=j_max)
            .map(|j| Truncation {
                j_max: j,
                k_max: 1i64 << j.clamp(1, 40) >> 1,
            })
            .collect();
        Self {
            alpha,
            k,
            levels,
            floor: if k > 3.0 { 1e-10 } else { 0.0 },
            tail_tol: 0.1,
        }
    }
}

/// Probe points of B at the coarsest level and the sup over probes of the
/// truncated sums over A, one value per level.
pub fn consistency_sum(
    a: &dyn IndexFamily,
    b: &dyn IndexFamily,
    cfg: &ConsistencyConfig,
) -> Result<ConsistencyReport> {
    consistency_sum_with(a, b, cfg, |probes, f| probes.iter().map(f).collect())
}

/// As [`consistency_sum`], with a caller-supplied map over probes (used for parallel execution).
pub fn consistency_sum_with<M>(
    a: &dyn IndexFamily,
    b: &dyn IndexFamily,
    cfg: &ConsistencyConfig,
    map: M,
) -> Result<ConsistencyReport>
where
    M: Fn(&[PhasePoint], &(dyn Fn(&PhasePoint) -> Vec<ProbeSum> + Sync)) -> Vec<Vec<ProbeSum>>,
{
    if !(cfg.k > 0.0) {
        return Err(domain("k must be positive"));
    }
    let first = *cfg
        .levels
        .first()
        .ok_or_else(|| Error::Insufficient("no truncation levels".into()))?;
    if a.dim() == 0 || a.dim() != b.dim() {
        return Err(Error::Insufficient(
            "empty or mismatched enumerations".into(),
        ));
    }
    let probes = b.probes(first);
    if probes.is_empty() {
        return Err(Error::Insufficient("no probe indices".into()));
    }
    let eval = |mu: &PhasePoint| -> Vec<ProbeSum> {
        cfg.levels
            .iter()
            .map(|&lv| a.sum_against(mu, lv, cfg.alpha, cfg.k, cfg.floor))
            .collect()
    };
    let per_probe = map(&probes, &eval);
    let n = cfg.levels.len();
    let mut levels = vec![0.0f64; n];
    let mut skipped = 0.0f64;
    for sums in &per_probe {
        for (i, s) in sums.iter().enumerate() {
            levels[i] = levels[i].max(s.sum);
        }
        skipped = skipped.max(sums[n - 1].skipped_mass);
    }
    if levels.iter().all(|&v| v == 0.0) {
        return Err(Error::Insufficient("empty enumeration".into()));
    }
    let increments: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let m = increments.len();
    let (converged, tail) = if m >= 2 && increments[m - 2] > 0.0 {
        let ratio = increments[m - 1].max(0.0) / increments[m - 2];
        let tail = if ratio < 1.0 {
            increments[m - 1].max(0.0) * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if tail <= cfg.tail_tol * levels[n - 1] {
            (true, tail)
        } else {
            (false, 0.0)
        }
    } else {
        (m >= 1 && increments.iter().all(|&x| x == 0.0), 0.0)
    };
    Ok(ConsistencyReport {
        k: cfg.k,
        alpha: cfg.alpha,
        sup_estimate: levels[n - 1] + tail,
        levels,
        increments,
        converged,
        skipped_mass: skipped,
        probes: probes.len(),
    })
}
