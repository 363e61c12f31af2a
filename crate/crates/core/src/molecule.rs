//! Weight functions of α-molecules and α-shearlet molecules, a finite-difference
//! order checker for sampled generators, the generators of the 3D frame, and the
//! transfer matrices between shearlet and molecule parametrizations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::frame::{atom_amplitude, window_value, WindowKey};
use crate::geometry::{angles_from_direction, rotation_phi, rotation_theta};
use crate::linalg::{norm, Mat};
use crate::parametrization::{permute, shear, zpow, SamplingData, ShClass, ShearletIndex};
use crate::volume::{SampledVolume, Samples};
use crate::windows::ProfileParams;

/// One component of a molecule order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OrderValue {
    Finite(u32),
    Infinite,
}

/// Order (L, M, N₁, N₂).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MoleculeOrder {
    pub l: OrderValue,
    pub m: OrderValue,
    pub n1: OrderValue,
    pub n2: OrderValue,
}

impl MoleculeOrder {
    pub fn finite(l: u32, m: u32, n1: u32, n2: u32) -> Self {
        use OrderValue::Finite;
        MoleculeOrder {
            l: Finite(l),
            m: Finite(m),
            n1: Finite(n1),
            n2: Finite(n2),
        }
    }

    pub fn infinite() -> Self {
        use OrderValue::Infinite;
        MoleculeOrder {
            l: Infinite,
            m: Infinite,
            n1: Infinite,
            n2: Infinite,
        }
    }

    /// [L, M, N₁, N₂], or an error if any component is ∞.
    pub fn values(&self) -> Result<[u32; 4]> {
        let f = |v: OrderValue| match v {
            OrderValue::Finite(x) => Ok(x),
            OrderValue::Infinite => Err(domain(
                "infinite order has no numeric weight; pass a finite surrogate",
            )),
        };
        Ok([f(self.l)?, f(self.m)?, f(self.n1)?, f(self.n2)?])
    }
}

fn bracket(x: f64) -> f64 {
    libm::sqrt(1.0 + x * x)
}

fn split(xi: &[f64]) -> (f64, f64) {
    let d = xi.len();
    (norm(&xi[..d - 1]), xi[d - 1])
}

/// min(1, s^{−1} + |ξ_d| + s^{−(1−α)}|ξ|_{[d−1]})^M ⟨|ξ|⟩^{−N₁} ⟨|ξ|_{[d−1]}⟩^{−N₂}.
pub fn weight_molcon(xi: &[f64], alpha: f64, s: f64, order: &MoleculeOrder) -> Result<f64> {
    let [_, m, n1, n2] = order.values()?;
    if !(s > 0.0) {
        return Err(domain("scale must be positive"));
    }
    if xi.len() < 2 {
        return Err(Error::InvalidDimension(xi.len()));
    }
    let (lateral, last) = split(xi);
    let inner = 1.0 / s + last.abs() + libm::pow(s, alpha - 1.0) * lateral;
    Ok(libm::pow(inner.min(1.0), m as f64)
        * libm::pow(bracket(norm(xi)), -(n1 as f64))
        * libm::pow(bracket(lateral), -(n2 as f64)))
}

/// min(1, σ^{−j} + σ^{−(1−α)j}|Z^{−ε}ξ|_{[d−1]} + |[Z^{−ε}ξ]_d|)^M / (⟨|ξ|⟩^{N₁} ⟨|Z^{−ε}ξ|_{[d−1]}⟩^{N₂}).
pub fn weight_shearcon(
    xi: &[f64],
    alpha: f64,
    sigma: f64,
    j: u32,
    epsilon: usize,
    order: &MoleculeOrder,
) -> Result<f64> {
    let [_, m, n1, n2] = order.values()?;
    if !(sigma > 1.0) {
        return Err(domain("sigma must exceed 1"));
    }
    let d = xi.len();
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if epsilon > d {
        return Err(Error::InvalidIndex(format!("epsilon {epsilon} > d = {d}")));
    }
    let z = permute(xi, -(epsilon as i64));
    let (lateral, last) = split(&z);
    let inner = libm::pow(sigma, -(j as f64))
        + libm::pow(sigma, -(1.0 - alpha) * j as f64) * lateral
        + last.abs();
    Ok(libm::pow(inner.min(1.0), m as f64)
        / (libm::pow(bracket(norm(xi)), n1 as f64) * libm::pow(bracket(lateral), n2 as f64)))
}

/// Which weight the order checker divides by.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "snake_case"))]
pub enum WeightMode {
    Molecule { s: f64 },
    Shearlet { sigma: f64, j: u32, epsilon: usize },
}

/// Axis-aligned sampling grid: point (i₀, i₁, i₂) sits at origin + step · i.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformGrid {
    pub origin: [f64; 3],
    pub step: f64,
}

/// sup |∂^ρ ĝ| / weight for one multi-index ρ.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DerivativeBound {
    pub rho: [u32; 3],
    pub sup_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderReport {
    pub order: [u32; 4],
    /// Maximum over all ρ of the per-derivative ratios.
    pub constant: f64,
    pub per_derivative: Vec<DerivativeBound>,
}

/// Multi-indices ρ ∈ ℕ³ with |ρ|₁ ≤ l, by total order then lexicographically.
pub fn multi_indices(l: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in 0..=l {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

/// Measures sup_ξ |∂^ρ ĝ(ξ)| / weight(ξ) for |ρ|₁ ≤ L on the interior grid points
/// (central differences, step = grid step). `min_band` is the narrowest transition
/// width of ĝ; the grid step must not exceed min_band/8 when L ≥ 1.
pub fn order_check(
    g_hat: &SampledVolume,
    grid: &UniformGrid,
    alpha: f64,
    mode: WeightMode,
    order: &MoleculeOrder,
    min_band: f64,
) -> Result<OrderReport> {
    let vals = order.values()?;
    let l = vals[0];
    if l > 2 {
        return Err(domain("finite differences support L <= 2"));
    }
    let h = grid.step;
    if !(h > 0.0) {
        return Err(domain("grid step must be positive"));
    }
    if l >= 1 && h > min_band / 8.0 {
        return Err(domain(format!(
            "grid step {h} exceeds 1/8 of the transition band {min_band}"
        )));
    }
    let [n0, n1, n2] = g_hat.dims;
    if n0 < 3 || n1 < 3 || n2 < 3 {
        return Err(Error::Insufficient(
            "grid needs at least 3 points per axis".into(),
        ));
    }
    let (re, im): (Vec<f64>, Vec<f64>) = match &g_hat.data {
        Samples::Real(v) => (v.clone(), vec![0.0; v.len()]),
        Samples::Complex(v) => v.iter().map(|c| (c.re, c.im)).unzip(),
    };
    let at = |v: &[f64], i: [usize; 3]| v[(i[0] * n1 + i[1]) * n2 + i[2]];
    let shift = |i: [usize; 3], ax: usize, s: i64| {
        let mut o = i;
        o[ax] = (o[ax] as i64 + s) as usize;
        o
    };
    let derivative = |v: &[f64], i: [usize; 3], rho: [u32; 3]| -> f64 {
        let axes: Vec<usize> = (0..3)
            .flat_map(|a| core::iter::repeat_n(a, rho[a] as usize))
            .collect();
        match axes.as_slice() {
            [] => at(v, i),
            [a] => (at(v, shift(i, *a, 1)) - at(v, shift(i, *a, -1))) / (2.0 * h),
            [a, b] if a == b => {
                (at(v, shift(i, *a, 1)) - 2.0 * at(v, i) + at(v, shift(i, *a, -1))) / (h * h)
            }
            [a, b] => {
                let pp = at(v, shift(shift(i, *a, 1), *b, 1));
                let pm = at(v, shift(shift(i, *a, 1), *b, -1));
                let mp = at(v, shift(shift(i, *a, -1), *b, 1));
                let mm = at(v, shift(shift(i, *a, -1), *b, -1));
                (pp - pm - mp + mm) / (4.0 * h * h)
            }
            _ => unreachable!("L <= 2"),
        }
    };
    let rhos = multi_indices(l);
    let mut sup = vec![0.0f64; rhos.len()];
    let lo = if l == 0 { 0 } else { 1 };
    for i0 in lo..n0 - lo {
        for i1 in lo..n1 - lo {
            for i2 in lo..n2 - lo {
                let i = [i0, i1, i2];
                let xi = [
                    grid.origin[0] + h * i0 as f64,
                    grid.origin[1] + h * i1 as f64,
                    grid.origin[2] + h * i2 as f64,
                ];
                let w = match mode {
                    WeightMode::Molecule { s } => weight_molcon(&xi, alpha, s, order)?,
                    WeightMode::Shearlet { sigma, j, epsilon } => {
                        weight_shearcon(&xi, alpha, sigma, j, epsilon, order)?
                    }
                };
                for (r, rho) in rhos.iter().enumerate() {
                    let dr = derivative(&re, i, *rho);
                    let di = derivative(&im, i, *rho);
                    let mag = libm::sqrt(dr * dr + di * di);
                    if mag > 0.0 {
                        sup[r] = sup[r].max(mag / w);
                    }
                }
            }
        }
    }
    let per_derivative: Vec<DerivativeBound> = rhos
        .into_iter()
        .zip(&sup)
        .map(|(rho, &s)| DerivativeBound { rho, sup_ratio: s })
        .collect();
    let constant = sup.iter().cloned().fold(0.0, f64::max);
    Ok(OrderReport {
        order: vals,
        constant,
        per_derivative,
    })
}

/// Generator γ̂ of a frame atom in the shearlet-molecule representation,
/// γ̂(ξ) = 2^{2j} ψ̂(Z^ε A^j S_ℓᵀ Z^{−ε} ξ) with the modulation removed. Coarse and
/// scale-0 boundary atoms (relabeled to the coarse part) keep ψ̂ itself.
pub fn sh_generator_hat(profile: &ProfileParams, key: &WindowKey, xi: [f64; 3]) -> Result<f64> {
    key.check()?;
    let relabeled = key.epsilon == 0 || (key.j == 0 && key.class() != ShClass::Interior);
    if relabeled {
        return Ok(atom_amplitude(key) * window_value(profile, key, xi));
    }
    let p = key.epsilon as i64;
    let a = libm::ldexp(1.0, key.j as i32);
    let st = shear(&[key.ell[0] as f64, key.ell[1] as f64], true, 3);
    let m = &(&(&zpow(3, p) * &Mat::diag(&[a, a, a * a])) * &st) * &zpow(3, -p);
    let y = m.mul_vec(&xi);
    Ok(a * a * atom_amplitude(key) * window_value(profile, key, [y[0], y[1], y[2]]))
}

/// Samples [`sh_generator_hat`] on a grid of the given shape.
pub fn sample_generator(
    profile: &ProfileParams,
    key: &WindowKey,
    grid: &UniformGrid,
    dims: [usize; 3],
) -> Result<SampledVolume> {
    key.check()?;
    let mut v = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for i0 in 0..dims[0] {
        for i1 in 0..dims[1] {
            for i2 in 0..dims[2] {
                let xi = [
                    grid.origin[0] + grid.step * i0 as f64,
                    grid.origin[1] + grid.step * i1 as f64,
                    grid.origin[2] + grid.step * i2 as f64,
                ];
                v.push(sh_generator_hat(profile, key, xi)?);
            }
        }
    }
    SampledVolume::new(dims, Samples::Real(v), crate::volume::Domain::Frequency)
}

/// Transfer matrices of one shearlet index and their operator norms.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrices {
    /// M = S^{−T}_{ℓη_j} Z^{−ε} R_φᵀ R_θᵀ.
    pub m: Mat,
    /// M̃ = A^{−j} M A^j.
    pub m_tilde: Mat,
    /// ‖M‖, ‖M⁻¹‖, ‖M̃‖, ‖M̃⁻¹‖.
    pub norms: [f64; 4],
    /// n_λ = (1 + η_j²|ℓ|²)^{−1/2}.
    pub n_lambda: f64,
}

/// M and M̃ for an index with ε ≥ 1. The rotation angles are those of the
/// orientation e_λ; Z^{−ε} maps e_λ back to the ε = d frame, so M e_d = n_λ e_d.
pub fn transfer_matrices(idx: &ShearletIndex, data: &SamplingData) -> Result<TransferMatrices> {
    let d = data.dim();
    if idx.epsilon == 0 || idx.epsilon > d {
        return Err(Error::InvalidIndex(format!(
            "transfer matrices need 1 <= epsilon <= {d}"
        )));
    }
    let pp = crate::parametrization::shearlet_phase(idx, data)?;
    let eta = data.eta(idx.j);
    let h: Vec<f64> = idx.ell.iter().map(|&l| l as f64 * eta).collect();
    let n_lambda = 1.0 / libm::sqrt(1.0 + h.iter().map(|v| v * v).sum::<f64>());
    let angles = angles_from_direction(&pp.e);
    let rot =
        &rotation_phi(angles.phi, d).transpose() * &rotation_theta(&angles.theta, d).transpose();
    let s_inv_t = shear(&h.iter().map(|v| -v).collect::<Vec<_>>(), true, d);
    let m = &(&s_inv_t * &zpow(d, -(idx.epsilon as i64))) * &rot;
    let s = libm::pow(data.sigma, idx.j as f64);
    let a = crate::parametrization::alpha_scale(data.alpha, s, d)?;
    let a_inv = crate::parametrization::alpha_scale(data.alpha, 1.0 / s, d)?;
    let m_tilde = &(&a_inv * &m) * &a;
    let inv = |x: &Mat| {
        x.inverse()
            .ok_or_else(|| Error::Infeasible("singular transfer matrix".into()))
    };
    let norms = [
        m.op_norm(),
        inv(&m)?.op_norm(),
        m_tilde.op_norm(),
        inv(&m_tilde)?.op_norm(),
    ];
    Ok(TransferMatrices {
        m,
        m_tilde,
        norms,
        n_lambda,
    })
}
