use serde::{Deserialize, Serialize};

/// Slanted disparity plane of one segment, parameterized around the
/// segment center: `d(u, v) = alpha (u - cx) + beta (v - cy) + gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Plane {
    pub alpha: f64,
    pub beta: f64,
    /// Disparity at the segment center.
    pub gamma: f64,
}

impl Plane {
    pub const fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub const fn fronto_parallel(gamma: f64) -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma,
        }
    }

    #[inline]
    pub fn disparity(&self, p: (f64, f64), center: (f64, f64)) -> f64 {
        plane_disparity(self, p, center)
    }

    /// The same plane re-expressed around another center.
    pub fn recentered(&self, from: (f64, f64), to: (f64, f64)) -> Plane {
        Plane {
            gamma: self.disparity(to, from),
            ..*self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }
}

#[inline]
pub fn plane_disparity(y: &Plane, p: (f64, f64), c: (f64, f64)) -> f64 {
    y.alpha * (p.0 - c.0) + y.beta * (p.1 - c.1) + y.gamma
}

/// Robust data cost `min(|d_obs - d_hat|, k)^2`.
#[inline]
pub fn truncated_quadratic(d_obs: f64, d_hat: f64, k: f64) -> f64 {
    let r = (d_obs - d_hat).abs().min(k);
    r * r
}
