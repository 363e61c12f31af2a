//! Cartoon-like phantoms f = f₀ + f₁·χ_B on [0,1]^d with an ellipsoidal jump set
//! of bounded curvature and tensor-bump smooth parts.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::gramian::uniform;
use crate::volume::{Domain, SampledVolume, Samples};

/// sup |g''| of the bump g(u) = (1 − (2u − 1)²)³ on [0,1]; also bounds sup |g|,
/// sup |g'| and every mixed second derivative of the tensor product.
pub const BUMP_C2: f64 = 24.0;

/// Univariate bump factor.
pub fn bump(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    let t = 2.0 * u - 1.0;
    let s = 1.0 - t * t;
    s * s * s
}

/// constant + amplitude · Π g(x_i).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoothPart {
    pub constant: f64,
    pub amplitude: f64,
}

impl SmoothPart {
    pub const ZERO: SmoothPart = SmoothPart {
        constant: 0.0,
        amplitude: 0.0,
    };

    pub fn constant(c: f64) -> Self {
        SmoothPart {
            constant: c,
            amplitude: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.amplitude == 0.0 {
            return self.constant;
        }
        self.constant + self.amplitude * x.iter().map(|&u| bump(u)).product::<f64>()
    }

    /// Certified upper bound on the C² norm (max over derivatives of order ≤ 2).
    pub fn c2_bound(&self) -> f64 {
        (self.constant.abs() + self.amplitude.abs()).max(BUMP_C2 * self.amplitude.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhantomSpec {
    pub d: usize,
    pub nu: f64,
    pub center: Vec<f64>,
    /// Axis-aligned semi-axes.
    pub semi_axes: Vec<f64>,
    pub f0: SmoothPart,
    pub f1: SmoothPart,
    pub seed: u64,
}

/// Largest principal curvature a_max / a_min² of an ellipsoid.
pub fn max_curvature(semi_axes: &[f64]) -> f64 {
    let lo = semi_axes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = semi_axes.iter().copied().fold(0.0, f64::max);
    hi / (lo * lo)
}

impl PhantomSpec {
    /// f₀ = 0, f₁ = value on a ball.
    pub fn ball(d: usize, center: Vec<f64>, radius: f64, value: f64) -> Self {
        PhantomSpec {
            d,
            nu: 1.0 / radius,
            center,
            semi_axes: alloc::vec![radius; d],
            f0: SmoothPart::ZERO,
            f1: SmoothPart::constant(value),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d != 2 && self.d != 3 {
            return Err(Error::InvalidDimension(self.d));
        }
        if self.center.len() != self.d || self.semi_axes.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: self.center.len().min(self.semi_axes.len()),
            });
        }
        if !(self.nu > 0.0) {
            return Err(domain("curvature bound must be positive"));
        }
        for (c, a) in self.center.iter().zip(&self.semi_axes) {
            if !(*a > 0.0) || c - a < -1e-12 || c + a > 1.0 + 1e-12 {
                return Err(Error::InvalidSpec(format!(
                    "ellipsoid leaves the unit cube (center {c}, semi-axis {a})"
                )));
            }
        }
        if max_curvature(&self.semi_axes) > self.nu * (1.0 + 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "curvature {} exceeds nu = {}",
                max_curvature(&self.semi_axes),
                self.nu
            )));
        }
        for part in [&self.f0, &self.f1] {
            if part.c2_bound() > 1.0 + 1e-12 {
                return Err(Error::InvalidSpec(format!(
                    "smooth part {part:?} has C2 norm above 1"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let s: f64 = x[..self.d]
            .iter()
            .zip(&self.center)
            .zip(&self.semi_axes)
            .map(|((x, c), a)| (x - c) * (x - c) / (a * a))
            .sum();
        s <= 1.0
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let inside = if self.contains(x) {
            self.f1.eval(x)
        } else {
            0.0
        };
        self.f0.eval(x) + inside
    }
}

const MAX_SEMI_AXIS: f64 = 0.45;
const MIN_SEMI_AXIS: f64 = 0.15;

/// Random phantom with curvature at most ν, deterministic per seed. Needs ν ≥ 2:
/// a ball of radius 1/ν has to fit in the unit cube. Both smooth parts are
/// bumps vanishing on the cube boundary.
pub fn make_phantom(nu: f64, d: usize, seed: u64) -> Result<PhantomSpec> {
    if d != 2 && d != 3 {
        return Err(Error::InvalidDimension(d));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(domain("curvature bound must be positive and finite"));
    }
    let r_min = 1.0 / nu;
    if r_min > 0.5 {
        return Err(Error::Infeasible(format!(
            "no ellipsoid with curvature <= {nu} fits in [0,1]^{d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = MAX_SEMI_AXIS.max(r_min);
    let lo = MIN_SEMI_AXIS.max(r_min).min(hi);
    let mut semi_axes = alloc::vec![r_min.max(lo); d];
    for _ in 0..64 {
        let cand: Vec<f64> = (0..d).map(|_| lo + (hi - lo) * uniform(&mut rng)).collect();
        if max_curvature(&cand) <= nu {
            semi_axes = cand;
            break;
        }
    }
    let center = semi_axes
        .iter()
        .map(|&a| a + (1.0 - 2.0 * a) * uniform(&mut rng))
        .collect();
    // Compactly supported parts: pure bumps with C² norm at most 1.
    let bump_part = |rng: &mut ChaCha8Rng| SmoothPart {
        constant: 0.0,
        amplitude: (0.5 + 0.5 * uniform(rng)) / BUMP_C2
            * if uniform(rng) < 0.5 { -1.0 } else { 1.0 },
    };
    let f0 = bump_part(&mut rng);
    let f1 = bump_part(&mut rng);
    let spec = PhantomSpec {
        d,
        nu,
        center,
        semi_axes,
        f0,
        f1,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

/// Samples at cell centers (i + ½)/n. A 2D phantom becomes an n×n×1 volume.
pub fn rasterize(spec: &PhantomSpec, n: usize) -> Result<SampledVolume> {
    spec.validate()?;
    if n < 8 {
        return Err(domain("rasterization needs n >= 8"));
    }
    let dims = if spec.d == 3 { [n, n, n] } else { [n, n, 1] };
    let h = 1.0 / n as f64;
    let mut data = Vec::with_capacity(dims.iter().product());
    for i in 0..dims[0] {
        for j in 0..dims[1] {
            for k in 0..dims[2] {
                let x = [
                    (i as f64 + 0.5) * h,
                    (j as f64 + 0.5) * h,
                    (k as f64 + 0.5) * h,
                ];
                data.push(spec.eval(&x[..spec.d]));
            }
        }
    }
    SampledVolume::new(dims, Samples::Real(data), Domain::Spatial)
}

/// Number of neighbouring sample pairs whose values differ by more than `tol`.
pub fn jump_faces(vol: &SampledVolume, tol: f64) -> usize {
    let Samples::Real(v) = &vol.data else {
        return 0;
    };
    let [a, b, c] = vol.dims;
    let mut count = 0;
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                let x = v[vol.offset(i, j, k)];
                let nbrs = [
                    (i + 1 < a, (i + 1, j, k)),
                    (j + 1 < b, (i, j + 1, k)),
                    (k + 1 < c, (i, j, k + 1)),
                ];
                for (ok, (p, q, r)) in nbrs {
                    if ok && (x - v[vol.offset(p, q, r)]).abs() > tol {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}
