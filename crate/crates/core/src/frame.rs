//! The band-limited 3D Parseval shearlet frame: index set, window pieces for
//! coarse, interior, boundary and corner atoms, tightness on a digital grid,
//! continuum atoms and their inner products, and the digital translation
//! lattice of the FFT transform.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::parametrization::{
    pyramid_of, sh_class, sh_shear_set, shear, zpow, ShClass, ShearletIndex,
};
use crate::windows::ProfileParams;

/// Translation lattice of the digital transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LatticeMode {
    /// Every window is read out on the full n³ grid.
    Full,
    /// Per-window power-of-two decimation, as coarse as the window support allows
    /// without aliasing.
    #[default]
    Decimated,
}

/// Digital frame on an n³ grid with scales 0..=J.
///
/// Grid frequency m ∈ [−n/2, n/2)³ maps to ξ = freq_scale · m. The default
/// freq_scale = 2^{2J−1}/n puts the grid edge at 2^{2J−2}, where the telescoped
/// target Φ̂²(2^{−2(J+1)}ξ) is still 1, so the frame is tight on the whole grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameSpec {
    pub n: usize,
    pub scales: u32,
    pub profile: ProfileParams,
    pub freq_scale: f64,
    pub lattice: LatticeMode,
}

impl FrameSpec {
    pub fn new(n: usize, scales: u32) -> Result<Self> {
        if scales > 12 {
            return Err(Error::InvalidSpec(format!("J = {scales} is too large")));
        }
        let spec = FrameSpec {
            n,
            scales,
            profile: ProfileParams::default(),
            freq_scale: libm::ldexp(1.0, 2 * scales as i32 - 1) / n.max(1) as f64,
            lattice: LatticeMode::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_lattice(mut self, lattice: LatticeMode) -> Self {
        self.lattice = lattice;
        self
    }

    /// n a power of two ≥ 8, 4^{J+1} ≤ n (the coarse window then spans at least
    /// one grid step) and a positive frequency scale.
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::InvalidSpec(format!(
                "n = {} must be a power of two >= 8",
                self.n
            )));
        }
        if self.scales > 12 || (1usize << (2 * self.scales + 2)) > self.n {
            return Err(Error::InvalidSpec(format!(
                "J = {} overflows the band of n = {} (need 4^(J+1) <= n)",
                self.scales, self.n
            )));
        }
        if !(self.freq_scale > 0.0 && self.freq_scale.is_finite()) {
            return Err(Error::InvalidSpec("freq_scale must be positive".into()));
        }
        self.profile
            .validate()
            .map_err(|e| Error::InvalidSpec(format!("{e}")))
    }

    /// Largest J accepted for grid size n.
    pub fn max_scales(n: usize) -> u32 {
        let mut j = 0;
        while (1usize << (2 * j + 4)) <= n {
            j += 1;
        }
        j
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Centered frequency of FFT bin i.
    pub fn centered(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i >= n / 2 {
            i - n
        } else {
            i
        }
    }

    pub fn xi(&self, m: [i64; 3]) -> [f64; 3] {
        [
            m[0] as f64 * self.freq_scale,
            m[1] as f64 * self.freq_scale,
            m[2] as f64 * self.freq_scale,
        ]
    }

    /// Row-major FFT bin of a frequency (taken mod n).
    pub fn bin(&self, m: [i64; 3]) -> usize {
        let n = self.n as i64;
        let w = |v: i64| v.rem_euclid(n) as usize;
        (w(m[0]) * self.n + w(m[1])) * self.n + w(m[2])
    }
}

/// (ε, j, ℓ) of one window; the coarse window is (0, 0, (0,0)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindowKey {
    pub epsilon: usize,
    pub j: u32,
    pub ell: [i64; 2],
}

impl WindowKey {
    pub const COARSE: WindowKey = WindowKey {
        epsilon: 0,
        j: 0,
        ell: [0, 0],
    };

    pub fn new(epsilon: usize, j: u32, ell: [i64; 2]) -> Self {
        WindowKey { epsilon, j, ell }
    }

    pub fn of(idx: &ShearletIndex) -> Result<Self> {
        if idx.ell.len() != 2 || idx.k.len() != 3 {
            return Err(Error::InvalidIndex(format!(
                "{idx:?} is not a 3D frame index"
            )));
        }
        let key = WindowKey {
            epsilon: idx.epsilon,
            j: idx.j,
            ell: [idx.ell[0], idx.ell[1]],
        };
        key.check()?;
        Ok(key)
    }

    pub fn index(&self, k: [i64; 3]) -> ShearletIndex {
        ShearletIndex::new(self.epsilon, self.j, self.ell.to_vec(), k.to_vec())
    }

    pub fn class(&self) -> ShClass {
        sh_class(self.epsilon, self.j, self.ell)
    }

    pub fn check(&self) -> Result<()> {
        let ok = match self.epsilon {
            0 => self.j == 0 && self.ell == [0, 0],
            1..=3 => self.j <= 30 && sh_shear_set(self.epsilon, self.j).contains(&self.ell),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidIndex(format!(
                "{self:?} is not a frame window"
            )))
        }
    }
}

/// Windows of scales 0..=J: the coarse window, then by (j, ε, ℓ).
pub fn index_set(scales: u32) -> Vec<WindowKey> {
    let mut out = vec![WindowKey::COARSE];
    for j in 0..=scales {
        for eps in 1..=3 {
            out.extend(
                sh_shear_set(eps, j)
                    .into_iter()
                    .map(|l| WindowKey::new(eps, j, l)),
            );
        }
    }
    out
}

/// One pyramid piece W(2^{−2j}ξ) v(2^j ξ_a/ξ_p − a0) v(2^j ξ_b/ξ_p − b0), where
/// (a, b) are the native axes of pyramid p: (2,3) for p=1, (3,1) for p=2,
/// (1,2) for p=3 (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece {
    pub pyramid: usize,
    pub a0: i64,
    pub b0: i64,
}

/// 0-based (p, a, b) axes of a pyramid.
pub fn pyramid_axes(p: usize) -> [usize; 3] {
    match p {
        1 => [0, 1, 2],
        2 => [1, 2, 0],
        3 => [2, 0, 1],
        _ => panic!("pyramid {p} out of range"),
    }
}

/// Pieces of a non-coarse window. Boundary atoms glue two pyramids, corner atoms
/// three; the sign flips follow the boundary definitions.
pub fn pieces(key: &WindowKey) -> Vec<Piece> {
    let [l1, l2] = key.ell;
    let b = 1i64 << key.j;
    let e = key.epsilon;
    let next = e % 3 + 1;
    match key.class() {
        ShClass::Coarse => Vec::new(),
        ShClass::Interior => vec![Piece {
            pyramid: e,
            a0: l1,
            b0: l2,
        }],
        ShClass::Boundary => {
            let s1 = l1.signum();
            vec![
                Piece {
                    pyramid: e,
                    a0: l1,
                    b0: l2,
                },
                Piece {
                    pyramid: next,
                    a0: s1 * l2,
                    b0: l1,
                },
            ]
        }
        ShClass::Corner => {
            debug_assert!(e == 1 && l1.abs() == b);
            let (s1, s2) = (l1.signum(), l2.signum());
            vec![
                Piece {
                    pyramid: 1,
                    a0: l1,
                    b0: l2,
                },
                Piece {
                    pyramid: 2,
                    a0: s1 * l2,
                    b0: l1,
                },
                Piece {
                    pyramid: 3,
                    a0: l2,
                    b0: s2 * l1,
                },
            ]
        }
    }
}

/// Value of a piece at ξ, ignoring which pyramid ξ lies in.
pub fn piece_value(profile: &ProfileParams, j: u32, piece: &Piece, xi: [f64; 3]) -> f64 {
    let [p, a, b] = pyramid_axes(piece.pyramid);
    if xi[p] == 0.0 {
        return 0.0;
    }
    let sc = libm::ldexp(1.0, j as i32);
    let va = profile.bump_v(sc * xi[a] / xi[p] - piece.a0 as f64);
    if va == 0.0 {
        return 0.0;
    }
    let vb = profile.bump_v(sc * xi[b] / xi[p] - piece.b0 as f64);
    if vb == 0.0 {
        return 0.0;
    }
    let q = libm::ldexp(1.0, -2 * j as i32);
    profile.corona_w([q * xi[0], q * xi[1], q * xi[2]]) * va * vb
}

/// Magnitude factor of ψ̂ for a window: Φ̂ for the coarse window, otherwise the
/// piece of the pyramid containing ξ (smallest index on ties).
pub fn window_eval(profile: &ProfileParams, key: &WindowKey, xi: [f64; 3]) -> Result<f64> {
    key.check()?;
    Ok(window_value(profile, key, xi))
}

pub(crate) fn window_value(profile: &ProfileParams, key: &WindowKey, xi: [f64; 3]) -> f64 {
    if key.epsilon == 0 {
        return profile.phi_hat(xi);
    }
    let p = pyramid_of(&xi, 0.0);
    if p == 0 {
        return 0.0;
    }
    pieces(key)
        .iter()
        .find(|pc| pc.pyramid == p)
        .map_or(0.0, |pc| piece_value(profile, key.j, pc, xi))
}

/// Calls `f(m, w(h·m))` for every m ∈ ℤ³ with |m_i| ≤ clip (when given) where the
/// window is nonzero. Each point is visited once.
pub fn for_each_support_point<F: FnMut([i64; 3], f64)>(
    profile: &ProfileParams,
    key: &WindowKey,
    h: f64,
    clip: Option<(i64, i64)>,
    mut f: F,
) {
    let (lo, hi) = clip.unwrap_or((i64::MIN / 4, i64::MAX / 4));
    if key.epsilon == 0 {
        let r = libm::ceil(0.125 / h) as i64;
        let (a, b) = ((-r).max(lo), r.min(hi));
        for m0 in a..=b {
            for m1 in a..=b {
                for m2 in a..=b {
                    let w = profile.phi_hat([m0 as f64 * h, m1 as f64 * h, m2 as f64 * h]);
                    if w != 0.0 {
                        f([m0, m1, m2], w);
                    }
                }
            }
        }
        return;
    }
    let sc = libm::ldexp(1.0, key.j as i32);
    let t_lo = libm::ldexp(1.0, 2 * key.j as i32) / 16.0;
    let t_hi = libm::ldexp(1.0, 2 * key.j as i32) / 2.0;
    let mp_lo = libm::floor(t_lo / h) as i64;
    let mp_hi = libm::ceil(t_hi / h) as i64;
    for pc in pieces(key) {
        let [p, a, b] = pyramid_axes(pc.pyramid);
        for sign in [-1i64, 1] {
            for mag in mp_lo.max(1)..=mp_hi {
                let mp = sign * mag;
                if mp < lo || mp > hi {
                    continue;
                }
                let t = mp as f64 * h;
                let range = |c: i64| {
                    let x0 = t * (c as f64 - 1.0) / sc;
                    let x1 = t * (c as f64 + 1.0) / sc;
                    let (u, v) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
                    let u = u.max(-t.abs());
                    let v = v.min(t.abs());
                    (
                        (libm::floor(u / h) as i64).max(lo),
                        (libm::ceil(v / h) as i64).min(hi),
                    )
                };
                let (a_lo, a_hi) = range(pc.a0);
                let (b_lo, b_hi) = range(pc.b0);
                let mut m = [0i64; 3];
                m[p] = mp;
                for ma in a_lo..=a_hi {
                    m[a] = ma;
                    for mb in b_lo..=b_hi {
                        m[b] = mb;
                        let xi = [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h];
                        if pyramid_of(&xi, 0.0) != pc.pyramid {
                            continue;
                        }
                        let w = piece_value(profile, key.j, &pc, xi);
                        if w != 0.0 {
                            f(m, w);
                        }
                    }
                }
            }
        }
    }
}

/// Sparse window on the digital grid: FFT bins with nonzero value.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseWindow {
    pub key: WindowKey,
    pub bins: Vec<u32>,
    pub values: Vec<f64>,
    /// Per-axis decimation of the translation lattice (1 for the full grid).
    pub decimation: [usize; 3],
}

impl SparseWindow {
    /// Side lengths of the translation lattice.
    pub fn lattice_dims(&self, n: usize) -> [usize; 3] {
        [
            n / self.decimation[0],
            n / self.decimation[1],
            n / self.decimation[2],
        ]
    }
}

/// The window restricted to the grid of `spec`.
pub fn digital_window(spec: &FrameSpec, key: &WindowKey) -> SparseWindow {
    let half = spec.n as i64 / 2;
    let mut pts: Vec<(u32, f64)> = Vec::new();
    for_each_support_point(
        &spec.profile,
        key,
        spec.freq_scale,
        Some((-half, half - 1)),
        |m, w| {
            pts.push((spec.bin(m) as u32, w));
        },
    );
    pts.sort_by_key(|p| p.0);
    let bins: Vec<u32> = pts.iter().map(|p| p.0).collect();
    let decimation = match spec.lattice {
        LatticeMode::Full => [1; 3],
        LatticeMode::Decimated => plan_decimation(spec.n, &bins),
    };
    SparseWindow {
        key: *key,
        values: pts.iter().map(|p| p.1).collect(),
        bins,
        decimation,
    }
}

/// All windows of `spec` in [`index_set`] order.
pub fn window_bank(spec: &FrameSpec) -> Vec<SparseWindow> {
    index_set(spec.scales)
        .iter()
        .map(|k| digital_window(spec, k))
        .collect()
}

/// Greedy per-axis power-of-two decimation D such that the support stays
/// injective modulo n/D (no aliasing when the spectrum is folded).
pub fn plan_decimation(n: usize, bins: &[u32]) -> [usize; 3] {
    let coords: Vec<[usize; 3]> = bins
        .iter()
        .map(|&b| {
            let b = b as usize;
            [b / (n * n), (b / n) % n, b % n]
        })
        .collect();
    let mut d = [1usize; 3];
    let mut seen = Vec::new();
    let mut injective = |d: [usize; 3]| {
        let m = [n / d[0], n / d[1], n / d[2]];
        seen.clear();
        seen.resize(m[0] * m[1] * m[2], false);
        for c in &coords {
            let i = ((c[0] % m[0]) * m[1] + c[1] % m[1]) * m[2] + c[2] % m[2];
            if seen[i] {
                return false;
            }
            seen[i] = true;
        }
        true
    };
    let mut grown = true;
    while grown {
        grown = false;
        for axis in 0..3 {
            if d[axis] < n {
                let mut t = d;
                t[axis] *= 2;
                if injective(t) {
                    d = t;
                    grown = true;
                }
            }
        }
    }
    d
}

/// Result of [`check_tight`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TightReport {
    pub n: usize,
    pub scales: u32,
    /// max over the grid of |Σ w² − Φ̂²(2^{−2(J+1)}ξ)|.
    pub max_dev: f64,
    pub argmax: [i64; 3],
    pub windows: usize,
    pub excluded_boundary: bool,
}

/// Tightness of the digital frame: Σ over windows of w² against the telescoped target.
pub fn check_tight(spec: &FrameSpec, exclude_boundary: bool) -> Result<TightReport> {
    spec.validate()?;
    let n = spec.n;
    let mut total = vec![0.0f64; spec.len()];
    let mut windows = 0;
    for key in index_set(spec.scales) {
        if exclude_boundary && matches!(key.class(), ShClass::Boundary | ShClass::Corner) {
            continue;
        }
        windows += 1;
        let w = digital_window(spec, &key);
        for (&b, &v) in w.bins.iter().zip(&w.values) {
            total[b as usize] += v * v;
        }
    }
    let q = libm::ldexp(1.0, -2 * (spec.scales as i32 + 1));
    let mut max_dev = 0.0f64;
    let mut argmax = [0i64; 3];
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                let m = [spec.centered(i0), spec.centered(i1), spec.centered(i2)];
                let xi = spec.xi(m);
                let target = spec.profile.phi_hat([q * xi[0], q * xi[1], q * xi[2]]);
                let dev = (total[(i0 * n + i1) * n + i2] - target * target).abs();
                if dev > max_dev {
                    max_dev = dev;
                    argmax = m;
                }
            }
        }
    }
    Ok(TightReport {
        n,
        scales: spec.scales,
        max_dev,
        argmax,
        windows,
        excluded_boundary: exclude_boundary,
    })
}

/// Largest disagreement between the two one-sided values of any window on the
/// interfaces |ξ_p| = |ξ_q| between pyramids, over scales 0..=J. A missing piece
/// counts as 0 on its side.
pub fn continuity_defect(profile: &ProfileParams, scales: u32, samples: usize) -> f64 {
    let samples = samples.max(2);
    let mut worst = 0.0f64;
    for key in index_set(scales).into_iter().filter(|k| k.epsilon != 0) {
        let pcs = pieces(&key);
        let side = |p: usize, xi: [f64; 3]| {
            pcs.iter()
                .find(|pc| pc.pyramid == p)
                .map_or(0.0, |pc| piece_value(profile, key.j, pc, xi))
        };
        let r0 = libm::ldexp(1.0, 2 * key.j as i32);
        for (p, q) in [(1usize, 2usize), (2, 3), (1, 3)] {
            let r = 6 - p - q;
            for t in [0.1 * r0, 0.2 * r0, 0.3 * r0] {
                for (sp, sq) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    for i in 0..samples {
                        let u = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
                        let mut xi = [0.0; 3];
                        xi[p - 1] = sp * t;
                        xi[q - 1] = sq * t;
                        xi[r - 1] = u * t;
                        worst = worst.max((side(p, xi) - side(q, xi)).abs());
                    }
                }
            }
        }
    }
    worst
}

/// Amplitude prefactor of the continuum atom: 2^{−2j} interior, 2^{−2j−3} boundary
/// and corner at j ≥ 1, 1 for the coarse and scale-0 boundary atoms.
pub fn atom_amplitude(key: &WindowKey) -> f64 {
    match key.class() {
        ShClass::Coarse => 1.0,
        ShClass::Interior => libm::ldexp(1.0, -2 * key.j as i32),
        ShClass::Boundary | ShClass::Corner if key.j == 0 => 1.0,
        ShClass::Boundary | ShClass::Corner => libm::ldexp(1.0, -2 * key.j as i32 - 3),
    }
}

/// B with ψ̂_{λ}(ξ) = amplitude · w(ξ) · exp(−2πi⟨Bξ, k⟩); the atom sits at Bᵀk.
pub fn atom_phase_matrix(key: &WindowKey) -> Mat {
    let class = key.class();
    if class == ShClass::Coarse || (key.j == 0 && class != ShClass::Interior) {
        return Mat::identity(3);
    }
    let p = key.epsilon as i64;
    let s = shear(&[-key.ell[0] as f64, -key.ell[1] as f64], true, 3);
    let a = libm::ldexp(1.0, -(key.j as i32));
    let a_inv = Mat::diag(&[a, a, a * a]);
    let b = &(&(&zpow(3, p) * &s) * &a_inv) * &zpow(3, -p);
    if class == ShClass::Interior {
        b
    } else {
        b.scale(0.25)
    }
}

/// Spatial center Bᵀk of a continuum atom.
pub fn atom_center(idx: &ShearletIndex) -> Result<[f64; 3]> {
    let key = WindowKey::of(idx)?;
    let k: Vec<f64> = idx.k.iter().map(|&v| v as f64).collect();
    let x = atom_phase_matrix(&key).transpose().mul_vec(&k);
    Ok([x[0], x[1], x[2]])
}

/// ψ̂_λ(ξ) of the continuum atom.
pub fn atom_hat(profile: &ProfileParams, idx: &ShearletIndex, xi: [f64; 3]) -> Result<Complex64> {
    let key = WindowKey::of(idx)?;
    let x = atom_center(idx)?;
    let w = atom_amplitude(&key) * window_value(profile, &key, xi);
    let phase = -2.0 * PI * (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]);
    Ok(Complex64::from_polar(w, phase))
}

/// Quadrature spacing for a pair with smaller scale j_min: half the grid step,
/// refined by 2^{J − j_min} so coarse atoms (spatially wider) alias further out.
pub fn quadrature_step(spec: &FrameSpec, j_min: u32) -> f64 {
    spec.freq_scale / 2.0 * libm::ldexp(1.0, j_min.min(spec.scales) as i32 - spec.scales as i32)
}

/// ⟨ψ_a, ψ_b⟩ = ∫ ψ̂_a conj(ψ̂_b) dξ by the rectangle rule on the support of the
/// smaller index. Exactly Hermitian in (a, b).
pub fn inner_product(spec: &FrameSpec, a: &ShearletIndex, b: &ShearletIndex) -> Result<Complex64> {
    let ka = WindowKey::of(a)?;
    let kb = WindowKey::of(b)?;
    if ka.j > spec.scales || kb.j > spec.scales {
        return Err(Error::InvalidIndex(format!(
            "scale above J = {}",
            spec.scales
        )));
    }
    if a <= b {
        ordered_inner_product(spec, a, &ka, b, &kb)
    } else {
        ordered_inner_product(spec, b, &kb, a, &ka).map(|z| z.conj())
    }
}

fn ordered_inner_product(
    spec: &FrameSpec,
    a: &ShearletIndex,
    ka: &WindowKey,
    b: &ShearletIndex,
    kb: &WindowKey,
) -> Result<Complex64> {
    if ka.j.abs_diff(kb.j) >= 2 && ka.epsilon != 0 && kb.epsilon != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let h = quadrature_step(spec, ka.j.min(kb.j));
    let xa = atom_center(a)?;
    let xb = atom_center(b)?;
    let delta = [xa[0] - xb[0], xa[1] - xb[1], xa[2] - xb[2]];
    let reach = libm::ldexp(1.0, 2 * ka.j as i32) / 2.0;
    let mmax = libm::ceil(reach / h) as i64 + 1;
    let tables: Vec<Vec<Complex64>> = delta
        .iter()
        .map(|&d| {
            (-mmax..=mmax)
                .map(|m| Complex64::from_polar(1.0, -2.0 * PI * h * m as f64 * d))
                .collect()
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_support_point(&spec.profile, ka, h, None, |m, wa| {
        let xi = [m[0] as f64 * h, m[1] as f64 * h, m[2] as f64 * h];
        let wb = window_value(&spec.profile, kb, xi);
        if wb != 0.0 {
            let ph = tables[0][(m[0] + mmax) as usize]
                * tables[1][(m[1] + mmax) as usize]
                * tables[2][(m[2] + mmax) as usize];
            acc += ph * (wa * wb);
        }
    });
    Ok(acc * (atom_amplitude(ka) * atom_amplitude(kb) * h * h * h))
}

/// One block of coefficients: a window read out on its translation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlock {
    pub key: WindowKey,
    pub decimation: [usize; 3],
    /// Row-major over the lattice of side n/D.
    pub values: Vec<Complex64>,
}

impl CoefficientBlock {
    pub fn lattice_dims(&self, n: usize) -> [usize; 3] {
        [
            n / self.decimation[0],
            n / self.decimation[1],
            n / self.decimation[2],
        ]
    }

    pub fn position(&self, n: usize, offset: usize) -> [i64; 3] {
        let d = self.lattice_dims(n);
        [
            (offset / (d[1] * d[2])) as i64,
            ((offset / d[2]) % d[1]) as i64,
            (offset % d[2]) as i64,
        ]
    }
}

/// Coefficient storage: one dense block per window, or selected entries.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientStore {
    Dense(Vec<CoefficientBlock>),
    Sparse(Vec<(ShearletIndex, Complex64)>),
}

/// Frame coefficients θ_λ(f). Indices are (ε, j, ℓ, k) with k the position on
/// the window's translation lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub spec: FrameSpec,
    pub store: CoefficientStore,
    /// True when only part of the coefficients was kept.
    pub truncated: bool,
}

impl CoefficientSet {
    pub fn len(&self) -> usize {
        match &self.store {
            CoefficientStore::Dense(b) => b.iter().map(|b| b.values.len()).sum(),
            CoefficientStore::Sparse(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn energy(&self) -> f64 {
        match &self.store {
            CoefficientStore::Dense(b) => b
                .iter()
                .flat_map(|b| b.values.iter())
                .map(|c| c.norm_sqr())
                .sum(),
            CoefficientStore::Sparse(e) => e.iter().map(|(_, c)| c.norm_sqr()).sum(),
        }
    }

    /// All (index, value) pairs in storage order.
    pub fn entries(&self) -> Vec<(ShearletIndex, Complex64)> {
        match &self.store {
            CoefficientStore::Dense(blocks) => blocks
                .iter()
                .flat_map(|b| {
                    b.values
                        .iter()
                        .enumerate()
                        .map(move |(i, &c)| (b.key.index(b.position(self.spec.n, i)), c))
                })
                .collect(),
            CoefficientStore::Sparse(e) => e.clone(),
        }
    }

    /// Magnitudes of all stored coefficients.
    pub fn magnitudes(&self) -> Vec<f64> {
        match &self.store {
            CoefficientStore::Dense(b) => b
                .iter()
                .flat_map(|b| b.values.iter())
                .map(|c| c.norm())
                .collect(),
            CoefficientStore::Sparse(e) => e.iter().map(|(_, c)| c.norm()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::parametrization::permute;
    use crate::windows::ProfileParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: ProfileParams = ProfileParams {
        step: crate::windows::Step::Mollifier,
    };

    fn count(j: u32, eps: usize) -> usize {
        index_set(j)
            .iter()
            .filter(|k| k.j == j && k.epsilon == eps)
            .count()
    }

    #[test]
    fn index_set_sizes() {
        assert_eq!(count(0, 3), 3);
        assert_eq!(count(0, 1), 7);
        assert_eq!(count(1, 2), 15);
        assert_eq!(index_set(2).len(), 1 + 13 + 49 + 193);
        assert_eq!(index_set(0)[0], WindowKey::COARSE);
    }

    #[test]
    fn spec_validation() {
        assert!(FrameSpec::new(64, 2).is_ok());
        assert!(FrameSpec::new(63, 2).is_err());
        assert!(FrameSpec::new(64, 3).is_err());
        assert!(FrameSpec::new(64, 9).is_err());
        assert_eq!(FrameSpec::max_scales(64), 2);
        assert_eq!(FrameSpec::max_scales(256), 3);
        assert_eq!(FrameSpec::new(64, 2).unwrap().freq_scale, 0.125);
    }

    #[test]
    fn window_examples() {
        assert_eq!(window_eval(&P, &WindowKey::COARSE, [0.0; 3]).unwrap(), 1.0);
        let k = WindowKey::new(3, 0, [0, 0]);
        assert_eq!(window_eval(&P, &k, [0.0, 0.0, 0.2]).unwrap(), 1.0);
        assert!(window_eval(&P, &WindowKey::new(3, 0, [1, 1]), [0.0; 3]).is_err());
        assert!(window_eval(&P, &WindowKey::new(0, 1, [0, 0]), [0.0; 3]).is_err());
    }

    /// Interior windows against W(2^{−2j}ξ) V(S^{−T}_ℓ A^{−j} Z^{−ε} ξ) built from matrices.
    #[test]
    fn interior_windows_match_matrix_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for key in index_set(2)
            .into_iter()
            .filter(|k| k.class() == ShClass::Interior)
        {
            let p = key.epsilon as i64;
            let s = shear(&[-key.ell[0] as f64, -key.ell[1] as f64], true, 3);
            let a = libm::ldexp(1.0, -(key.j as i32));
            let m = &(&s * &Mat::diag(&[a, a, a * a])) * &zpow(3, -p);
            for _ in 0..50 {
                let r = libm::ldexp(1.0, 2 * key.j as i32);
                let mut xi = [0.0; 3];
                for v in xi.iter_mut() {
                    *v = rng.gen_range(-0.5..0.5) * r;
                }
                let ell = key.ell;
                let c = 1.0 / libm::ldexp(1.0, key.j as i32);
                // bias samples into the window's cone
                let cone = permute(&[ell[0] as f64 * c, ell[1] as f64 * c, 1.0], p);
                let t = rng.gen_range(0.07..0.5) * r;
                for i in 0..3 {
                    xi[i] = xi[i] * 0.05 + cone[i] * t;
                }
                let eta = m.mul_vec(&xi);
                let q = libm::ldexp(1.0, -2 * key.j as i32);
                let expect = P.corona_w([q * xi[0], q * xi[1], q * xi[2]])
                    * P.angular_v([eta[0], eta[1], eta[2]]);
                let got = window_eval(&P, &key, xi).unwrap();
                assert!(
                    (got - expect).abs() < 1e-13,
                    "{key:?} {xi:?} {got} {expect}"
                );
            }
        }
    }

    #[test]
    fn boundary_pieces_follow_definitions() {
        // ε=3, ℓ1 = −2^j: P1 piece is v(2^j ξ3/ξ1 − ℓ1) v(2^j ξ2/ξ1 + ℓ2).
        let key = WindowKey::new(3, 1, [-2, 1]);
        let pcs = pieces(&key);
        assert_eq!(
            pcs[1],
            Piece {
                pyramid: 1,
                a0: -1,
                b0: -2
            }
        );
        let xi = [0.9, 0.1, -0.8];
        let direct = P.corona_w([xi[0] / 4.0, xi[1] / 4.0, xi[2] / 4.0])
            * P.bump_v(2.0 * xi[2] / xi[0] + 2.0)
            * P.bump_v(2.0 * xi[1] / xi[0] + 1.0);
        assert!((piece_value(&P, 1, &pcs[1], xi) - direct).abs() < 1e-15);
        // corner: P3 piece v(2^j ξ2/ξ3 − ε2ℓ1) v(2^j ξ1/ξ3 − ℓ2)
        let key = WindowKey::new(1, 1, [2, -2]);
        let pc = pieces(&key)[2];
        let xi = [-0.7, 0.75, -0.8];
        let direct = P.corona_w([xi[0] / 4.0, xi[1] / 4.0, xi[2] / 4.0])
            * P.bump_v(2.0 * xi[1] / xi[2] + 2.0)
            * P.bump_v(2.0 * xi[0] / xi[2] + 2.0);
        assert!((piece_value(&P, 1, &pc, xi) - direct).abs() < 1e-15);
    }

    #[test]
    fn windows_are_continuous_across_pyramids() {
        assert!(continuity_defect(&P, 2, 41) < 1e-12);
    }

    #[test]
    fn tight_on_small_grid() {
        let spec = FrameSpec::new(16, 1).unwrap();
        let r = check_tight(&spec, false).unwrap();
        assert!(r.max_dev < 1e-12, "{r:?}");
        let r = check_tight(&spec, true).unwrap();
        assert!(r.max_dev >= 0.5, "{r:?}");
    }

    #[test]
    fn coarse_only_at_origin() {
        let spec = FrameSpec::new(16, 0).unwrap();
        let bank = window_bank(&spec);
        let at0: f64 = bank
            .iter()
            .filter_map(|w| {
                w.bins
                    .iter()
                    .position(|&b| b == 0)
                    .map(|i| w.values[i] * w.values[i])
            })
            .sum();
        assert_eq!(at0, 1.0);
        assert!(bank[1..].iter().all(|w| !w.bins.contains(&0)));
    }

    #[test]
    fn support_enumeration_is_complete() {
        // brute force over a box against the enumerator
        let h = 0.05;
        for key in [
            WindowKey::new(1, 0, [1, -1]),
            WindowKey::new(2, 1, [2, 1]),
            WindowKey::new(3, 0, [0, 0]),
        ] {
            let mut fast = Vec::new();
            for_each_support_point(&P, &key, h, None, |m, w| fast.push((m, w)));
            fast.sort_by_key(|a| a.0);
            let r = (libm::ldexp(1.0, 2 * key.j as i32) / 2.0 / h) as i64 + 1;
            let mut slow = Vec::new();
            for a in -r..=r {
                for b in -r..=r {
                    for c in -r..=r {
                        let w = window_value(&P, &key, [a as f64 * h, b as f64 * h, c as f64 * h]);
                        if w != 0.0 {
                            slow.push(([a, b, c], w));
                        }
                    }
                }
            }
            assert_eq!(fast, slow, "{key:?}");
        }
    }

    #[test]
    fn decimation_is_alias_free() {
        let spec = FrameSpec::new(32, 1).unwrap();
        for w in window_bank(&spec) {
            let m = w.lattice_dims(32);
            let mut folded: Vec<usize> = w
                .bins
                .iter()
                .map(|&b| {
                    let b = b as usize;
                    let c = [b / 1024, (b / 32) % 32, b % 32];
                    ((c[0] % m[0]) * m[1] + c[1] % m[1]) * m[2] + c[2] % m[2]
                })
                .collect();
            folded.sort();
            folded.dedup();
            assert_eq!(folded.len(), w.bins.len());
            assert!(w.decimation.iter().all(|d| d.is_power_of_two()));
        }
    }

    #[test]
    fn atom_phase_and_center() {
        let key = WindowKey::new(3, 1, [1, 0]);
        let b = atom_phase_matrix(&key);
        // S^{−T}_ℓ A^{−1}: rows (1/2, 0, −1/4), (0, 1/2, 0), (0, 0, 1/4)
        let expect = Mat::from_rows(&[&[0.5, 0.0, -0.25], &[0.0, 0.5, 0.0], &[0.0, 0.0, 0.25]]);
        assert!(b.max_abs_diff(&expect) < 1e-15);
        let c = atom_center(&key.index([0, 0, 4])).unwrap();
        assert_eq!(c, [0.0, 0.0, 1.0]);
        assert_eq!(atom_amplitude(&WindowKey::new(3, 2, [4, 0])), 1.0 / 128.0);
        assert_eq!(
            atom_phase_matrix(&WindowKey::new(1, 0, [1, 1])),
            Mat::identity(3)
        );
    }

    #[test]
    fn self_inner_products() {
        let spec = FrameSpec::new(64, 2).unwrap();
        for key in [
            WindowKey::new(3, 1, [0, 1]),
            WindowKey::new(2, 2, [4, -3]),
            WindowKey::COARSE,
        ] {
            let idx = key.index([1, -2, 3]);
            let v = inner_product(&spec, &idx, &idx).unwrap();
            assert_eq!(v.im, 0.0);
            assert!(v.re > 0.0 && v.re <= 1.0, "{key:?} {v}");
        }
    }

    #[test]
    fn inner_products_are_hermitian_and_scale_separated() {
        let spec = FrameSpec::new(64, 2).unwrap();
        let a = WindowKey::new(1, 1, [1, 0]).index([0, 1, 2]);
        let b = WindowKey::new(1, 1, [2, 0]).index([1, 0, -3]);
        let ab = inner_product(&spec, &a, &b).unwrap();
        let ba = inner_product(&spec, &b, &a).unwrap();
        assert_eq!(ab, ba.conj());
        let c = WindowKey::new(3, 2, [0, 0]).index([0, 0, 0]);
        let d = WindowKey::new(3, 0, [0, 0]).index([0, 0, 0]);
        assert_eq!(
            inner_product(&spec, &c, &d).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn translate_sweep_decays() {
        let spec = FrameSpec::new(64, 2).unwrap();
        let key = WindowKey::new(3, 1, [0, 0]);
        let a = key.index([0, 0, 0]);
        let vals: Vec<f64> = (0..12)
            .map(|t| {
                inner_product(&spec, &a, &key.index([t, 0, 0]))
                    .unwrap()
                    .norm()
            })
            .collect();
        // upper envelope over blocks of three translates
        let env: Vec<f64> = vals
            .chunks(3)
            .map(|c| c.iter().cloned().fold(0.0, f64::max))
            .collect();
        for w in env.windows(2) {
            assert!(w[1] < w[0], "{vals:?}");
        }
    }
}
