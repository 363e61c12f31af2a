//! Smooth profiles of the band-limited frame: smooth step β, bump v, Meyer
//! scaling function φ̂, product window Φ̂, corona window W and angular window V.

use core::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

/// Half-width of the plateau of v (v ≡ 1 on [−δ, δ]).
pub const PLATEAU: f64 = 1.0 / 16.0;

/// Shape of the smooth step β.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Step {
    /// exp(−1/t) quotient; C^∞.
    #[default]
    Mollifier,
    /// Odd-symmetric polynomial step of class C^order.
    Polynomial { order: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileParams {
    pub step: Step,
}

impl ProfileParams {
    pub fn polynomial(order: u32) -> Self {
        ProfileParams {
            step: Step::Polynomial { order },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.step {
            Step::Polynomial { order: 0 } => {
                Err(domain("polynomial step order must be at least 1"))
            }
            _ => Ok(()),
        }
    }

    /// β: 0 for t ≤ 0, 1 for t ≥ 1, β(t) + β(1−t) = 1.
    pub fn smooth_step(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        match self.step {
            Step::Mollifier => {
                let a = libm::exp(-1.0 / t);
                let b = libm::exp(-1.0 / (1.0 - t));
                a / (a + b)
            }
            // Evaluating the upper half by reflection keeps β(t) + β(1−t) = 1 to rounding.
            Step::Polynomial { order } if t > 0.5 => 1.0 - poly_step(order, 1.0 - t),
            Step::Polynomial { order } => poly_step(order, t),
        }
    }

    /// v(t) = cos(π/2 · β(ρ(|t|))) with ρ(t) = (t − δ)/(1 − 2δ).
    pub fn bump_v(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= PLATEAU {
            1.0
        } else if a >= 1.0 - PLATEAU {
            0.0
        } else {
            libm::cos(FRAC_PI_2 * self.smooth_step((a - PLATEAU) / (1.0 - 2.0 * PLATEAU)))
        }
    }

    /// φ̂: 1 on [−1/16, 1/16], 0 outside [−1/8, 1/8], cosine-of-step transition.
    pub fn meyer_phi_hat(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 1.0 / 16.0 {
            1.0
        } else if a >= 1.0 / 8.0 {
            0.0
        } else {
            libm::cos(FRAC_PI_2 * self.smooth_step(16.0 * a - 1.0))
        }
    }

    /// Φ̂(ξ) = φ̂(ξ_1) φ̂(ξ_2) φ̂(ξ_3).
    pub fn phi_hat(&self, xi: [f64; 3]) -> f64 {
        let mut p = 1.0;
        for v in xi {
            p *= self.meyer_phi_hat(v);
            if p == 0.0 {
                break;
            }
        }
        p
    }

    /// W(ξ) = sqrt(max(0, Φ̂²(ξ/4) − Φ̂²(ξ))).
    pub fn corona_w(&self, xi: [f64; 3]) -> f64 {
        let outer = self.phi_hat([xi[0] / 4.0, xi[1] / 4.0, xi[2] / 4.0]);
        if outer == 0.0 {
            return 0.0;
        }
        let inner = self.phi_hat(xi);
        libm::sqrt((outer * outer - inner * inner).max(0.0))
    }

    /// V(ξ) = v(ξ_1/ξ_3) v(ξ_2/ξ_3), and 0 on the plane ξ_3 = 0.
    pub fn angular_v(&self, xi: [f64; 3]) -> f64 {
        if xi[2] == 0.0 {
            return 0.0;
        }
        self.bump_v(xi[0] / xi[2]) * self.bump_v(xi[1] / xi[2])
    }
}

/// S_N(x) = x^{N+1} Σ_{n=0}^{N} C(N+n, n) C(2N+1, N−n) (−x)^n.
fn poly_step(order: u32, x: f64) -> f64 {
    let n = order as u64;
    let mut sum = 0.0;
    let mut xp = 1.0;
    for i in 0..=n {
        sum += binom(n + i, i) * binom(2 * n + 1, n - i) * xp;
        xp *= -x;
    }
    sum * libm::pow(x, (n + 1) as f64)
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

const DEFAULT: ProfileParams = ProfileParams {
    step: Step::Mollifier,
};

pub fn smooth_step(t: f64) -> f64 {
    DEFAULT.smooth_step(t)
}

pub fn bump_v(t: f64) -> f64 {
    DEFAULT.bump_v(t)
}

pub fn meyer_phi_hat(t: f64) -> f64 {
    DEFAULT.meyer_phi_hat(t)
}

pub fn phi_hat(xi: [f64; 3]) -> f64 {
    DEFAULT.phi_hat(xi)
}

pub fn corona_w(xi: [f64; 3]) -> f64 {
    DEFAULT.corona_w(xi)
}

pub fn angular_v(xi: [f64; 3]) -> f64 {
    DEFAULT.angular_v(xi)
}
