//! Sparse initial disparities: a compact census + semi-global aggregation
//! matcher with left-right and uniqueness checks, or passthrough of a
//! precomputed map.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagery::{DisparityImage, Image};

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("left is {0}x{1} but right is {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("invalid match configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub max_disparity: usize,
    /// Census window is `(2r + 1)^2`; at most 3.
    pub block_radius: usize,
    /// 4 (horizontal and vertical) or 8 (plus diagonals).
    pub n_paths: usize,
    pub p1: u32,
    pub p2: u32,
    pub lr_threshold: f32,
    /// Minimum relative margin of the best aggregated cost over the best
    /// cost more than one disparity away.
    pub uniqueness: f32,
    pub subpixel: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            max_disparity: 64,
            block_radius: 2,
            n_paths: 8,
            p1: 10,
            p2: 120,
            lr_threshold: 1.0,
            uniqueness: 0.1,
            subpixel: true,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), MatchError> {
        let bad = |m: &str| Err(MatchError::InvalidConfig(m.into()));
        if self.max_disparity < 1 {
            return bad("max_disparity must be >= 1");
        }
        if !(1..=3).contains(&self.block_radius) {
            return bad("block_radius must be in 1..=3");
        }
        if self.n_paths != 4 && self.n_paths != 8 {
            return bad("n_paths must be 4 or 8");
        }
        if self.p2 < self.p1 {
            return bad("p2 must be >= p1");
        }
        if !(self.lr_threshold >= 0.0) || !(self.uniqueness >= 0.0) {
            return bad("lr_threshold and uniqueness must be >= 0");
        }
        Ok(())
    }
}

/// Valid set F = valid pixels of `obs`.
pub fn passthrough(obs: &DisparityImage) -> DisparityImage {
    obs.clone()
}

fn census(img: &Image, r: usize) -> Vec<u64> {
    let (w, h) = (img.width(), img.height());
    let g: Vec<u8> = img.to_gray().data().to_vec();
    let r = r as isize;
    let mut out = vec![0u64; w * h];
    for v in 0..h as isize {
        for u in 0..w as isize {
            let c = g[(v as usize) * w + u as usize];
            let mut bits = 0u64;
            for dv in -r..=r {
                for du in -r..=r {
                    if du == 0 && dv == 0 {
                        continue;
                    }
                    let (x, y) = (
                        (u + du).clamp(0, w as isize - 1),
                        (v + dv).clamp(0, h as isize - 1),
                    );
                    bits = (bits << 1) | u64::from(g[y as usize * w + x as usize] < c);
                }
            }
            out[v as usize * w + u as usize] = bits;
        }
    }
    out
}

/// Dense disparities of the left view; pixels failing the left-right or
/// uniqueness check are invalid. Left pixel `u` matches right pixel `u - d`.
pub fn match_stereo(
    left: &Image,
    right: &Image,
    cfg: &MatchConfig,
) -> Result<DisparityImage, MatchError> {
    cfg.validate()?;
    let (w, h) = (left.width(), left.height());
    if (w, h) != (right.width(), right.height()) {
        return Err(MatchError::DimensionMismatch(
            w,
            h,
            right.width(),
            right.height(),
        ));
    }
    let nd = cfg.max_disparity + 1;
    let cl = census(left, cfg.block_radius);
    let cr = census(right, cfg.block_radius);

    // beyond the left border the right view is clamped to its first column,
    // so those disparities never look better than in-range ones on flat input
    let mut cost = vec![0u16; w * h * nd];
    for v in 0..h {
        for u in 0..w {
            let base = (v * w + u) * nd;
            for d in 0..nd {
                cost[base + d] =
                    (cl[v * w + u] ^ cr[v * w + u.saturating_sub(d)]).count_ones() as u16;
            }
        }
    }

    let agg = aggregate(&cost, w, h, nd, cfg);

    let argmin = |s: &[u32]| -> usize {
        let mut best = 0;
        for d in 1..s.len() {
            if s[d] < s[best] {
                best = d;
            }
        }
        best
    };

    // right view from the same volume: right pixel x pairs with left x + d
    let mut right_disp = vec![usize::MAX; w * h];
    for v in 0..h {
        for x in 0..w {
            let mut best = (u32::MAX, usize::MAX);
            for d in 0..nd {
                if x + d >= w {
                    break;
                }
                let s = agg[(v * w + x + d) * nd + d];
                if s < best.0 {
                    best = (s, d);
                }
            }
            right_disp[v * w + x] = best.1;
        }
    }

    let mut out = DisparityImage::new_invalid(w, h);
    for v in 0..h {
        for u in 0..w {
            let s = &agg[(v * w + u) * nd..(v * w + u + 1) * nd];
            let d0 = argmin(s);
            let second = s
                .iter()
                .enumerate()
                .filter(|&(d, _)| d.abs_diff(d0) > 1)
                .map(|(_, &c)| c)
                .min()
                .unwrap_or(u32::MAX);
            if (second as f64) <= s[d0] as f64 * (1.0 + cfg.uniqueness as f64) {
                continue;
            }
            let mut d = d0 as f32;
            if cfg.subpixel && d0 > 0 && d0 + 1 < nd {
                let (a, b, c) = (s[d0 - 1] as f32, s[d0] as f32, s[d0 + 1] as f32);
                let denom = a - 2.0 * b + c;
                if denom > 0.0 {
                    d += (a - c) / (2.0 * denom);
                }
            }
            let ur = u as isize - d0 as isize;
            if ur < 0 {
                continue;
            }
            let dr = right_disp[v * w + ur as usize];
            if dr == usize::MAX || (dr as f32 - d).abs() > cfg.lr_threshold {
                continue;
            }
            out.set(u, v, Some(d.clamp(0.0, cfg.max_disparity as f32)));
        }
    }
    Ok(out)
}

/// Sum over scanline directions of the path costs
/// `L(p, d) = C(p, d) + min(L(q, d), L(q, d±1) + p1, min L(q) + p2) - min L(q)`.
fn aggregate(cost: &[u16], w: usize, h: usize, nd: usize, cfg: &MatchConfig) -> Vec<u32> {
    const DIRS: [(isize, isize); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (-1, -1),
        (-1, 1),
        (1, -1),
    ];
    let (p1, p2) = (cfg.p1, cfg.p2);
    let mut agg = vec![0u32; w * h * nd];
    let mut path = vec![0u32; w * h * nd];
    for &(du, dv) in &DIRS[..cfg.n_paths] {
        // the predecessor (u - du, v - dv) is visited first in this order
        let forward = dv > 0 || (dv == 0 && du > 0);
        for step in 0..w * h {
            let idx = if forward { step } else { w * h - 1 - step };
            let (u, v) = ((idx % w) as isize, (idx / w) as isize);
            let (pu, pv) = (u - du, v - dv);
            let base = idx * nd;
            if pu < 0 || pv < 0 || pu >= w as isize || pv >= h as isize {
                for d in 0..nd {
                    path[base + d] = cost[base + d] as u32;
                }
            } else {
                let pb = (pv as usize * w + pu as usize) * nd;
                let prev_min = *path[pb..pb + nd].iter().min().expect("nd >= 2");
                for d in 0..nd {
                    let mut best = path[pb + d].min(prev_min + p2);
                    if d > 0 {
                        best = best.min(path[pb + d - 1] + p1);
                    }
                    if d + 1 < nd {
                        best = best.min(path[pb + d + 1] + p1);
                    }
                    path[base + d] = cost[base + d] as u32 + best - prev_min;
                }
            }
        }
        for (a, p) in agg.iter_mut().zip(&path) {
            *a += p;
        }
    }
    agg
}
