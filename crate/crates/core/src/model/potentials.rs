use serde::{Deserialize, Serialize};

use super::{truncated_quadratic, ModelParams, Plane};
use crate::segmentation::ColorHistogram;

/// Observed disparity `(u, v, D(p))` of a pixel in F.
pub type ObsPoint = (f64, f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryLabel {
    /// Both segments lie on one plane.
    Co,
    /// The planes meet at a crease.
    Hi,
    /// Segment `i` occludes segment `j`.
    Lo,
    /// Segment `j` occludes segment `i`.
    Ro,
}

impl BoundaryLabel {
    pub const ALL: [BoundaryLabel; 4] = [Self::Co, Self::Hi, Self::Lo, Self::Ro];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Co => "co",
            Self::Hi => "hi",
            Self::Lo => "lo",
            Self::Ro => "ro",
        }
    }
}

impl std::fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundaryLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown boundary label {s:?}"))
    }
}

/// Data term: `Σ_{p ∈ S_i ∩ F} min(|D(p) - d̂_i(p)|, K)²`.
pub fn phi_seg(y: &Plane, center: (f64, f64), obs: &[ObsPoint], k: f64) -> f64 {
    let mut acc = 0.0;
    for &(u, v, d) in obs {
        acc += truncated_quadratic(d, y.disparity((u, v), center), k);
    }
    acc
}

/// Combines the band data costs of both planes (`s_i`, `s_j`, each a
/// [`phi_seg`]-style sum over `B_ij ∩ F`) as the boundary term does.
#[inline]
pub fn combine_bdy1(o: BoundaryLabel, s_i: f64, s_j: f64) -> f64 {
    match o {
        BoundaryLabel::Lo => s_i,
        BoundaryLabel::Ro => s_j,
        BoundaryLabel::Hi | BoundaryLabel::Co => 0.5 * (s_i + s_j),
    }
}

/// Boundary data term: the band is explained by the occluder, or by both
/// planes equally for hinge and coplanar boundaries.
pub fn phi_bdy1(
    o: BoundaryLabel,
    (y_i, c_i): (&Plane, (f64, f64)),
    (y_j, c_j): (&Plane, (f64, f64)),
    band_obs: &[ObsPoint],
    k: f64,
) -> f64 {
    let s_i = phi_seg(y_i, c_i, band_obs, k);
    let s_j = phi_seg(y_j, c_j, band_obs, k);
    combine_bdy1(o, s_i, s_j)
}

/// `lambda_imp` if the front plane lies strictly behind the back plane at
/// any of `points`.
pub fn phi_occ(
    (front, c_f): (&Plane, (f64, f64)),
    (back, c_b): (&Plane, (f64, f64)),
    points: &[(f64, f64)],
    lambda_imp: f64,
) -> f64 {
    if points
        .iter()
        .any(|&p| front.disparity(p, c_f) < back.disparity(p, c_b))
    {
        lambda_imp
    } else {
        0.0
    }
}

/// `lambda_imp` if the plane is negative at any of `points`.
pub fn phi_neg(y: &Plane, c: (f64, f64), points: &[(f64, f64)], lambda_imp: f64) -> f64 {
    if points.iter().any(|&p| y.disparity(p, c) < 0.0) {
        lambda_imp
    } else {
        0.0
    }
}

/// Count, mean and central second moments of a pixel set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub n: f64,
    pub mean: (f64, f64),
    /// `mean((u - ū)²)`, `mean((u - ū)(v - v̄))`, `mean((v - v̄)²)`.
    pub sxx: f64,
    pub sxy: f64,
    pub syy: f64,
}

impl Moments {
    pub fn from_pixels<'a>(pixels: impl IntoIterator<Item = &'a (usize, usize)> + Clone) -> Self {
        let (mut n, mut su, mut sv) = (0.0, 0.0, 0.0);
        for &(u, v) in pixels.clone() {
            n += 1.0;
            su += u as f64;
            sv += v as f64;
        }
        if n == 0.0 {
            return Self::default();
        }
        let mean = (su / n, sv / n);
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for &(u, v) in pixels {
            let (x, y) = (u as f64 - mean.0, v as f64 - mean.1);
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
        }
        Self {
            n,
            mean,
            sxx: sxx / n,
            sxy: sxy / n,
            syy: syy / n,
        }
    }

    /// Moments of the disjoint union.
    pub fn merge(&self, other: &Moments) -> Moments {
        let n = self.n + other.n;
        if n == 0.0 {
            return Self::default();
        }
        let (wa, wb) = (self.n / n, other.n / n);
        let mean = (
            wa * self.mean.0 + wb * other.mean.0,
            wa * self.mean.1 + wb * other.mean.1,
        );
        let shift = |m: &Moments| {
            let (dx, dy) = (m.mean.0 - mean.0, m.mean.1 - mean.1);
            (m.sxx + dx * dx, m.sxy + dx * dy, m.syy + dy * dy)
        };
        let (a, b) = (shift(self), shift(other));
        Moments {
            n,
            mean,
            sxx: wa * a.0 + wb * b.0,
            sxy: wa * a.1 + wb * b.1,
            syy: wa * a.2 + wb * b.2,
        }
    }
}

/// Mean of `(d̂_i(p) - d̂_j(p))²` over a pixel set given its moments. The
/// difference is affine, so with `q = p - mean` the mean is
/// `A² sxx + 2AB sxy + B² syy + C²` where `C` is the difference at the mean.
pub fn mean_squared_difference(
    (y_i, c_i): (&Plane, (f64, f64)),
    (y_j, c_j): (&Plane, (f64, f64)),
    m: &Moments,
) -> f64 {
    if m.n == 0.0 {
        return 0.0;
    }
    let a = y_i.alpha - y_j.alpha;
    let b = y_i.beta - y_j.beta;
    let c = y_i.disparity(m.mean, c_i) - y_j.disparity(m.mean, c_j);
    (a * a * m.sxx + 2.0 * a * b * m.sxy + b * b * m.syy + c * c).max(0.0)
}

/// Convex hull vertices (counter-clockwise, no collinear points). Affine
/// functions attain their minimum over the set at one of them.
pub fn convex_hull(pixels: &[(usize, usize)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(i64, i64)> = pixels.iter().map(|&(u, v)| (u as i64, v as i64)).collect();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts.into_iter().map(|(u, v)| (u as f64, v as f64)).collect();
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull.into_iter()
        .map(|(u, v)| (u as f64, v as f64))
        .collect()
}

/// Plane-only geometry of a neighbor pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGeometry {
    /// Hull vertices of `B_ij`.
    pub hull: Vec<(f64, f64)>,
    /// Moments of `B_ij`.
    pub band: Moments,
    /// Moments of `S_i ∪ S_j`.
    pub union: Moments,
}

/// Compatibility term: occlusion beats hinge beats coplanar in cost, with
/// impossibility penalties for negative disparities and for an occluder
/// that is behind the occluded plane.
pub fn phi_bdy2(
    o: BoundaryLabel,
    i: (&Plane, (f64, f64)),
    j: (&Plane, (f64, f64)),
    g: &PairGeometry,
    p: &ModelParams,
) -> f64 {
    let negs = phi_neg(i.0, i.1, &g.hull, p.lambda_imp) + phi_neg(j.0, j.1, &g.hull, p.lambda_imp);
    match o {
        BoundaryLabel::Lo => p.lambda_occ + negs + phi_occ(i, j, &g.hull, p.lambda_imp),
        BoundaryLabel::Ro => p.lambda_occ + negs + phi_occ(j, i, &g.hull, p.lambda_imp),
        BoundaryLabel::Hi => p.lambda_hinge + negs + mean_squared_difference(i, j, &g.band),
        BoundaryLabel::Co => negs + mean_squared_difference(i, j, &g.union),
    }
}

/// Color term from a precomputed χ² distance.
#[inline]
pub fn color_cost(o: BoundaryLabel, chi2: f64, p: &ModelParams) -> f64 {
    match o {
        BoundaryLabel::Co => (p.kappa * chi2).min(p.lambda_col),
        _ => p.lambda_col,
    }
}

/// `min(κ χ²(h_i, h_j), λ_col)` for coplanar boundaries, `λ_col` otherwise.
pub fn phi_color(
    o: BoundaryLabel,
    h_i: &ColorHistogram,
    h_j: &ColorHistogram,
    p: &ModelParams,
) -> f64 {
    color_cost(o, h_i.chi_squared(h_j), p)
}
