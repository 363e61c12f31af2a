//! Directions on the unit sphere, their angle representation, projected angles
//! and the gnomonic projection.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{domain, Error, Result};
use crate::linalg::{norm, Mat};

const UNIT_TOL: f64 = 1e-12;

/// A unit vector in ℝ^d, d ≥ 2.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    /// Accepts `coords` only if it already has unit norm (within 1e-12).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDimension(coords.len()));
        }
        let r = norm(&coords);
        if (r - 1.0).abs() > UNIT_TOL {
            return Err(domain("direction must have unit norm"));
        }
        Ok(Direction { coords })
    }

    /// Normalizes a nonzero vector.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDimension(coords.len()));
        }
        let r = norm(&coords);
        if !(r > 0.0) || !r.is_finite() {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        coords.iter_mut().for_each(|c| *c /= r);
        Ok(Direction { coords })
    }

    /// The i-th standard basis vector (0-based).
    pub fn basis(d: usize, i: usize) -> Self {
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        Direction { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn neg(&self) -> Self {
        Direction {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

/// Angles (θ_1..θ_{d−2}, φ) with θ_1 ∈ [0,π], θ_i ∈ [−π/2,π/2] for i ≥ 2 and φ ∈ [0,2π).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AngleSet {
    pub theta: Vec<f64>,
    pub phi: f64,
}

impl AngleSet {
    pub fn validate(&self) -> Result<()> {
        for (i, &t) in self.theta.iter().enumerate() {
            let ok = if i == 0 {
                (0.0..=PI).contains(&t)
            } else {
                (-FRAC_PI_2..=FRAC_PI_2).contains(&t)
            };
            if !ok {
                return Err(domain("theta component out of range"));
            }
        }
        if !(0.0..=TAU).contains(&self.phi) {
            return Err(domain("phi out of range"));
        }
        Ok(())
    }
}

/// η = R_φᵀ R_θᵀ e_d. For d = 2 the θ block is empty and η = R_φᵀ e_2 = (−sin φ, cos φ).
pub fn direction_from_angles(a: &AngleSet, d: usize) -> Result<Direction> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if a.theta.len() != d - 2 {
        return Err(Error::DimensionMismatch {
            expected: d - 2,
            found: a.theta.len(),
        });
    }
    a.validate()?;
    let (sp, cp) = libm::sincos(a.phi);
    if d == 2 {
        return Ok(Direction {
            coords: vec![-sp, cp],
        });
    }
    let mut eta = vec![0.0; d];
    let (s1, c1) = libm::sincos(a.theta[0]);
    eta[d - 1] = c1;
    // `r` carries sinθ_1 · Π cosθ_i of the angles consumed so far.
    let mut r = s1;
    for m in 2..=d - 2 {
        let (sm, cm) = libm::sincos(a.theta[m - 1]);
        eta[d - m] = -sm * r;
        r *= cm;
    }
    eta[0] = cp * r;
    eta[1] = sp * r;
    Ok(Direction { coords: eta })
}

/// Inverse of [`direction_from_angles`]. At a pole (and whenever a partial
/// radius vanishes) the unidentifiable angles are set to 0.
pub fn angles_from_direction(e: &Direction) -> AngleSet {
    let eta = e.coords();
    let d = eta.len();
    if d == 2 {
        return AngleSet {
            theta: Vec::new(),
            phi: canonical_phi(libm::atan2(-eta[0], eta[1])),
        };
    }
    let head = |m: usize| norm(&eta[..m]);
    let mut theta = vec![0.0; d - 2];
    let r1 = head(d - 1);
    if r1 == 0.0 {
        return AngleSet { theta, phi: 0.0 };
    }
    theta[0] = libm::atan2(r1, eta[d - 1]);
    for m in 2..=d - 2 {
        let rest = head(d - m);
        if rest == 0.0 && eta[d - m] == 0.0 {
            return AngleSet { theta, phi: 0.0 };
        }
        theta[m - 1] = libm::atan2(-eta[d - m], rest);
    }
    let phi = if eta[0] == 0.0 && eta[1] == 0.0 {
        0.0
    } else {
        canonical_phi(libm::atan2(eta[1], eta[0]))
    };
    AngleSet { theta, phi }
}

fn canonical_phi(p: f64) -> f64 {
    let p = if p < 0.0 { p + TAU } else { p };
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Plane rotation in coordinates (i, j) with the sign layout of the θ factors:
/// [[cos, −sin], [sin, cos]].
fn plane_rotation(d: usize, i: usize, j: usize, angle: f64) -> Mat {
    let (s, c) = libm::sincos(angle);
    let mut m = Mat::identity(d);
    m[(i, i)] = c;
    m[(i, j)] = -s;
    m[(j, i)] = s;
    m[(j, j)] = c;
    m
}

/// R_θ: product of rotations where θ_i acts in the plane (e_1, e_{d+1−i}).
pub fn rotation_theta(theta: &[f64], d: usize) -> Mat {
    theta
        .iter()
        .enumerate()
        .fold(Mat::identity(d), |acc, (i, &t)| {
            &acc * &plane_rotation(d, 0, d - 1 - i, t)
        })
}

/// R_φ = [[cos, sin], [−sin, cos]] in the (e_1, e_2) plane.
pub fn rotation_phi(phi: f64, d: usize) -> Mat {
    plane_rotation(d, 0, 1, -phi)
}

/// Angle d_𝕊(v, w) = arccos⟨v, w⟩, evaluated as 2·atan2(|v − w|, |v + w|), which
/// is exact at v = w and keeps full precision for nearly parallel vectors.
pub fn sphere_distance(v: &Direction, w: &Direction) -> Result<f64> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    let (mut dm, mut dp) = (0.0, 0.0);
    for (a, b) in v.coords().iter().zip(w.coords()) {
        dm += (a - b) * (a - b);
        dp += (a + b) * (a + b);
    }
    Ok(2.0 * libm::atan2(libm::sqrt(dm), libm::sqrt(dp)))
}

/// The representative of θ + πℤ in [−π/2, π/2).
pub fn project_angle(theta: f64) -> f64 {
    if (-FRAC_PI_2..FRAC_PI_2).contains(&theta) {
        return theta;
    }
    let mut r = theta - PI * libm::floor((theta + FRAC_PI_2) / PI);
    if r >= FRAC_PI_2 {
        r -= PI;
    } else if r < -FRAC_PI_2 {
        r += PI;
    }
    r
}

/// x ↦ x / [x]_d.
pub fn gnomonic(x: &[f64]) -> Result<Vec<f64>> {
    let last = *x.last().ok_or(Error::InvalidDimension(0))?;
    if last == 0.0 {
        return Err(domain(
            "gnomonic projection needs a nonzero last coordinate",
        ));
    }
    Ok(x.iter().map(|v| v / last).collect())
}
