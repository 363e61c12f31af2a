//! Phase space ℙ_d = ℝ₊ × 𝕊^{d−1} × ℝ^d, the scaling/shearing/permutation
//! operators, pyramids, the shearlet parametrization and the relabeling of the
//! band-limited 3D frame.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::geometry::Direction;
use crate::linalg::{norm, Mat};

/// A point (s, e, x) of phase space.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhasePoint {
    pub s: f64,
    pub e: Direction,
    pub x: Vec<f64>,
}

impl PhasePoint {
    pub fn new(s: f64, e: Direction, x: Vec<f64>) -> Result<Self> {
        if !(s > 0.0) {
            return Err(domain("scale must be positive"));
        }
        if x.len() != e.dim() {
            return Err(Error::DimensionMismatch {
                expected: e.dim(),
                found: x.len(),
            });
        }
        Ok(PhasePoint { s, e, x })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// (ε, j, ℓ, k). Ordering is lexicographic in that field order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShearletIndex {
    pub epsilon: usize,
    pub j: u32,
    pub ell: Vec<i64>,
    pub k: Vec<i64>,
}

impl ShearletIndex {
    pub fn new(epsilon: usize, j: u32, ell: Vec<i64>, k: Vec<i64>) -> Self {
        ShearletIndex { epsilon, j, ell, k }
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }
}

/// Rule j ↦ η_j.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum EtaRule {
    /// η_j = base · ratio^j.
    Geometric { base: f64, ratio: f64 },
    /// η_j = c · σ^{−j(1−α)}.
    Parabolic { c: f64 },
}

/// Rule (ε, j) ↦ ℒ_{ε,j}.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ShearRule {
    /// The shear sets of the band-limited 3D frame: |ℓ_1| ≤ 2^j, |ℓ_2| < 2^j, plus the
    /// four corners (±2^j, ±2^j) for ε = 1. Only defined for d = 3.
    Sh,
    /// All ℓ with |ℓ|_∞ ≤ ⌈factor · σ^{j(1−α)}⌉.
    Cube { factor: f64 },
}

pub const TAU_MIN: f64 = 1e-3;
pub const TAU_MAX: f64 = 1e3;

/// Sampling data (σ, η, ℒ, 𝒯) together with α and the declared constants C_η, C_ℒ.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplingData {
    pub sigma: f64,
    pub alpha: f64,
    pub eta_rule: EtaRule,
    pub shear_rule: ShearRule,
    pub tau: Vec<f64>,
    pub c_eta: f64,
    pub c_shear: f64,
}

impl Default for SamplingData {
    fn default() -> Self {
        Self::sh(vec![1.0; 3])
    }
}

impl SamplingData {
    /// σ = 4, α = ½, η_j = 2^{−j}, shear sets of the 3D frame, translation steps `tau`.
    pub fn sh(tau: Vec<f64>) -> Self {
        SamplingData {
            sigma: 4.0,
            alpha: 0.5,
            eta_rule: EtaRule::Geometric {
                base: 1.0,
                ratio: 0.5,
            },
            shear_rule: ShearRule::Sh,
            tau,
            c_eta: 2.0,
            c_shear: 2.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.tau.len()
    }

    pub fn eta(&self, j: u32) -> f64 {
        match self.eta_rule {
            EtaRule::Geometric { base, ratio } => base * libm::pow(ratio, j as f64),
            EtaRule::Parabolic { c } => c * libm::pow(self.sigma, -(j as f64) * (1.0 - self.alpha)),
        }
    }

    /// σ^{j(1−α)}, the natural number of directions per axis at scale j.
    pub fn direction_scale(&self, j: u32) -> f64 {
        libm::pow(self.sigma, j as f64 * (1.0 - self.alpha))
    }

    /// ℒ_{ε,j} in lexicographic order. For ε = 0 this is {0}.
    pub fn shear_set(&self, epsilon: usize, j: u32) -> Vec<Vec<i64>> {
        let d = self.dim();
        if epsilon == 0 {
            return vec![vec![0; d - 1]];
        }
        match self.shear_rule {
            ShearRule::Sh => sh_shear_set(epsilon, j)
                .into_iter()
                .map(|l| l.to_vec())
                .collect(),
            ShearRule::Cube { factor } => {
                let r = libm::ceil(factor * self.direction_scale(j)) as i64;
                cube_points(d - 1, r)
            }
        }
    }

    pub fn contains_shear(&self, epsilon: usize, j: u32, ell: &[i64]) -> bool {
        if epsilon == 0 {
            return j == 0 && ell.iter().all(|&l| l == 0);
        }
        match self.shear_rule {
            ShearRule::Sh => ell.len() == 2 && sh_contains(epsilon, j, [ell[0], ell[1]]),
            ShearRule::Cube { factor } => {
                let r = libm::ceil(factor * self.direction_scale(j)) as i64;
                ell.iter().all(|l| l.abs() <= r)
            }
        }
    }

    /// Checks σ > 1, α ∈ [0,1], the η and ℒ growth conditions for j ≤ j_max and the τ range.
    pub fn validate(&self, j_max: u32) -> Result<()> {
        let d = self.dim();
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        if !(self.sigma > 1.0) {
            return Err(domain("sigma must exceed 1"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(domain("alpha must lie in [0,1]"));
        }
        if matches!(self.shear_rule, ShearRule::Sh) && d != 3 {
            return Err(domain("the frame shear rule needs d = 3"));
        }
        if !self.tau.iter().all(|t| (TAU_MIN..=TAU_MAX).contains(t)) {
            return Err(domain("tau entries outside the declared range"));
        }
        for j in 0..=j_max {
            let r = self.eta(j) * self.direction_scale(j);
            if !(r >= 1.0 / self.c_eta && r <= self.c_eta) {
                return Err(domain(format!("eta_{j} violates the declared C_eta bound")));
            }
            for epsilon in 1..=d {
                let m = self
                    .shear_set(epsilon, j)
                    .iter()
                    .flat_map(|l| l.iter().map(|v| v.abs()))
                    .max()
                    .unwrap_or(0);
                if m as f64 > self.c_shear * self.direction_scale(j) {
                    return Err(domain(format!("shear set at j={j} violates C_shear")));
                }
            }
        }
        Ok(())
    }

    fn check_index(&self, idx: &ShearletIndex) -> Result<()> {
        let d = self.dim();
        if idx.k.len() != d || idx.ell.len() != d - 1 || idx.epsilon > d {
            return Err(Error::InvalidIndex(format!(
                "{idx:?} does not match dimension {d}"
            )));
        }
        if !self.contains_shear(idx.epsilon, idx.j, &idx.ell) {
            return Err(Error::InvalidIndex(format!(
                "{idx:?}: shear outside the shear set"
            )));
        }
        Ok(())
    }
}

fn cube_points(dim: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-r..=r).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// A_{α,s} = diag(s^α, …, s^α, s).
pub fn alpha_scale(alpha: f64, s: f64, d: usize) -> Result<Mat> {
    if !(s > 0.0) {
        return Err(domain("scale must be positive"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain("alpha must lie in [0,1]"));
    }
    let mut diag = vec![libm::pow(s, alpha); d];
    diag[d - 1] = s;
    Ok(Mat::diag(&diag))
}

/// S_h (hᵀ in the last row) or its transpose.
pub fn shear(h: &[f64], transposed: bool, d: usize) -> Mat {
    assert_eq!(h.len() + 1, d, "shear vector must have length d-1");
    let mut m = Mat::identity(d);
    for (i, &v) in h.iter().enumerate() {
        if transposed {
            m[(i, d - 1)] = v;
        } else {
            m[(d - 1, i)] = v;
        }
    }
    m
}

/// Z: e_d ↦ e_1, e_i ↦ e_{i+1}.
pub fn cyclic_perm(d: usize) -> Mat {
    let mut m = Mat::zeros(d);
    for i in 0..d {
        m[((i + 1) % d, i)] = 1.0;
    }
    m
}

/// Z^p v for integer p (negative powers allowed), by index rotation.
pub fn permute<T: Copy>(v: &[T], p: i64) -> Vec<T> {
    let d = v.len() as i64;
    (0..d).map(|i| v[(i - p).rem_euclid(d) as usize]).collect()
}

/// 0 inside the box |ξ|_∞ ≤ box_c, otherwise the smallest ε with |ξ_ε| maximal (1-based).
pub fn pyramid_of(xi: &[f64], box_c: f64) -> usize {
    let mut best = 0;
    let mut m = -1.0;
    for (i, v) in xi.iter().enumerate() {
        if v.abs() > m {
            m = v.abs();
            best = i;
        }
    }
    if m <= box_c {
        0
    } else {
        best + 1
    }
}

/// Φ^s(ε, j, ℓ, k): s = σ^j, e = n_λ Z^ε(η_j ℓ, 1), x = Z^ε S^{−1}_{ℓη_j} A^{−j} Z^{−ε} 𝒯 k.
pub fn shearlet_phase(idx: &ShearletIndex, data: &SamplingData) -> Result<PhasePoint> {
    data.check_index(idx)?;
    let k: Vec<f64> = idx.k.iter().map(|&v| v as f64).collect();
    Ok(shearlet_lattice(idx.epsilon, idx.j, &idx.ell, data, &data.tau).point(&k))
}

/// The phase points of one (ε, j, ℓ) as an affine image of the translation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLattice {
    pub s: f64,
    pub e: Direction,
    /// x(k) = basis · k + offset.
    pub basis: Mat,
    pub offset: Vec<f64>,
}

impl PhaseLattice {
    pub fn point(&self, k: &[f64]) -> PhasePoint {
        let mut x = self.basis.mul_vec(k);
        x.iter_mut().zip(&self.offset).for_each(|(a, b)| *a += b);
        PhasePoint {
            s: self.s,
            e: self.e.clone(),
            x,
        }
    }
}

/// Phase lattice of (ε, j, ℓ) under `data` with translation steps `tau`.
pub fn shearlet_lattice(
    epsilon: usize,
    j: u32,
    ell: &[i64],
    data: &SamplingData,
    tau: &[f64],
) -> PhaseLattice {
    let d = tau.len();
    let t = Mat::diag(tau);
    if epsilon == 0 {
        return PhaseLattice {
            s: 1.0,
            e: Direction::basis(d, d - 1),
            basis: t,
            offset: vec![0.0; d],
        };
    }
    let p = epsilon as i64;
    let eta = data.eta(j);
    let h: Vec<f64> = ell.iter().map(|&l| l as f64 * eta).collect();
    let mut v = h.clone();
    v.push(1.0);
    let r = norm(&v);
    let e = Direction::normalize(permute(&v, p)).expect("nonzero by construction");
    debug_assert!((norm(e.coords()) - 1.0).abs() < 1e-12 && r >= 1.0);
    let s = libm::pow(data.sigma, j as f64);
    let a_inv = alpha_scale(data.alpha, 1.0 / s, d).expect("positive scale");
    let z = zpow(d, p);
    let zi = zpow(d, -p);
    let s_inv = shear(&h.iter().map(|v| -v).collect::<Vec<_>>(), false, d);
    let basis = &(&(&(&z * &s_inv) * &a_inv) * &zi) * &t;
    PhaseLattice {
        s,
        e,
        basis,
        offset: vec![0.0; d],
    }
}

/// Z^p as a matrix.
pub fn zpow(d: usize, p: i64) -> Mat {
    let mut m = Mat::zeros(d);
    for i in 0..d {
        m[((i as i64 + p).rem_euclid(d as i64) as usize, i)] = 1.0;
    }
    m
}

fn sh_contains(epsilon: usize, j: u32, ell: [i64; 2]) -> bool {
    let b = 1i64 << j;
    let plain = ell[0].abs() <= b && ell[1].abs() < b;
    match epsilon {
        1 => plain || (ell[0].abs() == b && ell[1].abs() == b),
        2 | 3 => plain,
        _ => false,
    }
}

/// ℒ_{ε,j} of the 3D frame in lexicographic order (ε ∈ {1,2,3}).
pub fn sh_shear_set(epsilon: usize, j: u32) -> Vec<[i64; 2]> {
    let b = 1i64 << j;
    let mut out = Vec::new();
    for l1 in -b..=b {
        for l2 in -b..=b {
            if sh_contains(epsilon, j, [l1, l2]) {
                out.push([l1, l2]);
            }
        }
    }
    out
}

/// Atom classes of the 3D frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ShClass {
    Coarse,
    Interior,
    Boundary,
    Corner,
}

pub fn sh_class(epsilon: usize, j: u32, ell: [i64; 2]) -> ShClass {
    let b = 1i64 << j;
    if epsilon == 0 {
        ShClass::Coarse
    } else if ell[0].abs() == b && ell[1].abs() == b {
        ShClass::Corner
    } else if ell[0].abs() == b {
        ShClass::Boundary
    } else {
        ShClass::Interior
    }
}

/// True if `idx` belongs to the index set of the 3D frame (any scale).
pub fn in_lambda_sh(idx: &ShearletIndex) -> bool {
    if idx.k.len() != 3 || idx.ell.len() != 2 {
        return false;
    }
    if idx.epsilon == 0 {
        return idx.j == 0 && idx.ell == [0, 0];
    }
    sh_contains(idx.epsilon, idx.j, [idx.ell[0], idx.ell[1]])
}

/// The 11 elements of Γ (coarse triple, scale-0 boundary and corner triples) in
/// lexicographic order; the position is 𝒩.
pub fn gamma_set() -> Vec<(usize, u32, [i64; 2])> {
    let mut g = vec![(0, 0, [0, 0])];
    for eps in 1..=3 {
        for l in sh_shear_set(eps, 0) {
            if sh_class(eps, 0, l) != ShClass::Interior {
                g.push((eps, 0, l));
            }
        }
    }
    g.sort();
    g
}

/// 𝒩(ε, j, ℓ), or `None` outside Γ.
pub fn gamma_number(epsilon: usize, j: u32, ell: [i64; 2]) -> Option<i64> {
    gamma_set()
        .iter()
        .position(|g| *g == (epsilon, j, ell))
        .map(|p| p as i64)
}

/// F_label: members of Γ × ℤ³ become coarse indices (0,0,0,(k_1,k_2,11k_3+𝒩)); others unchanged.
pub fn relabel_sh(idx: &ShearletIndex) -> Result<ShearletIndex> {
    if !in_lambda_sh(idx) {
        return Err(Error::InvalidIndex(format!("{idx:?} is not a frame index")));
    }
    match gamma_number(idx.epsilon, idx.j, [idx.ell[0], idx.ell[1]]) {
        Some(n) => Ok(ShearletIndex::new(
            0,
            0,
            vec![0, 0],
            vec![idx.k[0], idx.k[1], 11 * idx.k[2] + n],
        )),
        None => Ok(idx.clone()),
    }
}

/// Inverse of [`relabel_sh`] on its image.
pub fn unrelabel_sh(idx: &ShearletIndex) -> Result<ShearletIndex> {
    if idx.epsilon != 0 {
        return if in_lambda_sh(idx)
            && gamma_number(idx.epsilon, idx.j, [idx.ell[0], idx.ell[1]]).is_none()
        {
            Ok(idx.clone())
        } else {
            Err(Error::InvalidIndex(format!(
                "{idx:?} is not in the relabeled set"
            )))
        };
    }
    if idx.k.len() != 3 {
        return Err(Error::InvalidIndex(format!("{idx:?}")));
    }
    let n = idx.k[2].rem_euclid(11);
    let (eps, j, ell) = gamma_set()[n as usize];
    Ok(ShearletIndex::new(
        eps,
        j,
        ell.to_vec(),
        vec![idx.k[0], idx.k[1], idx.k[2].div_euclid(11)],
    ))
}

/// Translation steps used by the frame's parametrization for each atom class:
/// 1 for interior atoms, ¼ for boundary and corner atoms.
pub fn sh_tau(class: ShClass) -> f64 {
    match class {
        ShClass::Coarse | ShClass::Interior => 1.0,
        ShClass::Boundary | ShClass::Corner => 0.25,
    }
}

/// Phase point of a frame atom: relabel, then Φ^s with σ = 4, η_j = 2^{−j} and the
/// class-dependent 𝒯 (diag(1,1,1/11) on the relabeled coarse part).
pub fn sh_phase(idx: &ShearletIndex) -> Result<PhasePoint> {
    let r = relabel_sh(idx)?;
    if r.epsilon == 0 {
        let x = vec![r.k[0] as f64, r.k[1] as f64, r.k[2] as f64 / 11.0];
        return Ok(PhasePoint {
            s: 1.0,
            e: Direction::basis(3, 2),
            x,
        });
    }
    let tau = sh_tau(sh_class(r.epsilon, r.j, [r.ell[0], r.ell[1]]));
    let data = SamplingData::sh(vec![tau; 3]);
    let k: Vec<f64> = r.k.iter().map(|&v| v as f64).collect();
    Ok(shearlet_lattice(r.epsilon, r.j, &r.ell, &data, &data.tau).point(&k))
}
