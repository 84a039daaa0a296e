//! Piecewise-planar synthetic scenes with known planes, visibility, and
//! sparse noisy disparity observations.
//!
//! Regions come from recursive straight-line splits (horizontal, vertical,
//! or diagonal) of the largest remaining region, optionally starting with a
//! cross split that yields a 4-way junction. Every region gets its own plane
//! and a global depth rank; along every shared boundary the higher-ranked
//! region is nearer (larger disparity) by at least `min_occlusion_margin`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    io::{save_disparity, save_image, save_label_map, save_mask},
    DisparityFormat, DisparityImage, GroundTruth, Image, ImageError, Visibility,
};
use crate::model::Plane;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub width: usize,
    pub height: usize,
    pub n_planes: usize,
    /// Standard deviation of the Gaussian observation noise, pixels.
    pub noise_sigma: f64,
    /// Inclusive range of samples drawn on each region-pair boundary, all on
    /// the occluding side.
    pub boundary_samples: (usize, usize),
    /// Sampling rate of interior observations among pixels at least
    /// 3 px from any other region.
    pub interior_rate: f64,
    /// Probability of starting with a cross split (needs `n_planes >= 4`).
    pub cross_probability: f64,
    /// Largest |slope| of a region plane, disparity per pixel.
    pub max_slope: f64,
    /// Spacing of plane offsets between consecutive depth ranks, pixels.
    pub depth_gap: f64,
    /// Required front-minus-back disparity along every shared boundary.
    pub min_occlusion_margin: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            n_planes: 5,
            noise_sigma: 0.0,
            boundary_samples: (3, 5),
            interior_rate: 0.05,
            cross_probability: 0.5,
            max_slope: 0.02,
            depth_gap: 6.0,
            min_occlusion_margin: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub config: SyntheticConfig,
    /// One plane per region, all expressed around `plane_center`.
    pub planes: Vec<Plane>,
    pub plane_center: (f64, f64),
    /// Depth rank per region; larger is nearer.
    pub depth_rank: Vec<usize>,
    pub region_map: Vec<usize>,
    pub left: Image,
    pub gt: GroundTruth,
    pub sparse_observations: DisparityImage,
    pub noise_sigma: f64,
}

impl SyntheticScene {
    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn height(&self) -> usize {
        self.config.height
    }

    pub fn region_disparity(&self, region: usize, u: f64, v: f64) -> f64 {
        self.planes[region].disparity((u, v), self.plane_center)
    }
}

const MAX_SPLIT_ATTEMPTS: usize = 400;
const MAX_PLANE_ATTEMPTS: usize = 500;

/// Colors sit at the centers of the 4x4x4 histogram bins; texture noise
/// stays inside a bin.
const LEVELS: [i32; 4] = [32, 96, 160, 224];
const TEXTURE_AMPLITUDE: i32 = 12;
/// Interior samples keep this Chebyshev distance from other regions.
const INTERIOR_CLEARANCE: usize = 3;

pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticScene, ImageError> {
    let (w, h) = (config.width, config.height);
    if w < 32 || h < 32 {
        return Err(ImageError::InfeasibleConfig(format!(
            "{w}x{h} is smaller than 32x32"
        )));
    }
    if config.n_planes < 2 {
        return Err(ImageError::InfeasibleConfig(
            "need at least 2 planes".into(),
        ));
    }
    if !(config.noise_sigma >= 0.0) || !(0.0..=1.0).contains(&config.interior_rate) {
        return Err(ImageError::InfeasibleConfig(
            "noise_sigma < 0 or interior_rate outside [0, 1]".into(),
        ));
    }
    let (kmin, kmax) = config.boundary_samples;
    if kmin > kmax {
        return Err(ImageError::InfeasibleConfig(
            "boundary_samples range is empty".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let region_map = split_regions(config, &mut rng)?;
    let center = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);

    let boundaries = region_boundaries(&region_map, w, h);
    for ((r, s), px) in &boundaries {
        if px.len() < kmax {
            return Err(ImageError::InfeasibleConfig(format!(
                "boundary between regions {r} and {s} has only {} pixels",
                px.len()
            )));
        }
    }
    let (planes, depth_rank) = sample_planes(config, &region_map, &boundaries, center, &mut rng)?;

    let mut gt_values = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let r = region_map[v * w + u];
            gt_values.push(Some(
                planes[r].disparity((u as f64, v as f64), center) as f32
            ));
        }
    }
    let gt_disp = DisparityImage::from_values(w, h, gt_values)?;
    let mask = visibility_mask(&gt_disp);
    let gt = GroundTruth::new(gt_disp, mask)?;

    let left = render_left(config, &region_map, &mut rng);

    // boundary samples on the occluding side of each region pair (BTreeMap
    // keeps the order stable), then interior samples away from every edge
    let mut sampled = vec![false; w * h];
    for (&(r, s), px) in &boundaries {
        let front = if depth_rank[r] > depth_rank[s] { r } else { s };
        let front_px: Vec<usize> = px
            .iter()
            .copied()
            .filter(|&i| region_map[i] == front)
            .collect();
        let k = rng.random_range(kmin..=kmax).min(front_px.len());
        for &i in front_px.choose_multiple(&mut rng, k) {
            sampled[i] = true;
        }
    }
    if config.interior_rate > 0.0 {
        let near = near_region_edge(&region_map, w, h, INTERIOR_CLEARANCE);
        for (i, s) in sampled.iter_mut().enumerate() {
            if rng.random_bool(config.interior_rate) && !near[i] {
                *s = true;
            }
        }
    }
    let mut obs = DisparityImage::new_invalid(w, h);
    for (i, &s) in sampled.iter().enumerate() {
        if s {
            let z: f64 = rng.sample(StandardNormal);
            let d = gt.disparity.values()[i].expect("gt is dense") as f64 + config.noise_sigma * z;
            obs.set(i % w, i / w, Some(d.max(0.0) as f32));
        }
    }

    Ok(SyntheticScene {
        config: config.clone(),
        planes,
        plane_center: center,
        depth_rank,
        region_map,
        left,
        gt,
        sparse_observations: obs,
        noise_sigma: config.noise_sigma,
    })
}

#[derive(Clone, Copy)]
enum LineKind {
    Horizontal,
    Vertical,
    Diagonal,
    AntiDiagonal,
}

impl LineKind {
    fn side(self, u: i64, v: i64, pu: i64, pv: i64) -> bool {
        match self {
            LineKind::Horizontal => v >= pv,
            LineKind::Vertical => u >= pu,
            LineKind::Diagonal => (u - pu) - (v - pv) >= 0,
            LineKind::AntiDiagonal => (u - pu) + (v - pv) >= 0,
        }
    }
}

fn is_connected(mask: &[bool], w: usize, h: usize) -> bool {
    let Some(start) = mask.iter().position(|&m| m) else {
        return false;
    };
    let total = mask.iter().filter(|&&m| m).count();
    let mut seen = vec![false; mask.len()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 0;
    while let Some(i) = stack.pop() {
        count += 1;
        let (u, v) = (i % w, i / w);
        let mut push = |j: usize| {
            if mask[j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        };
        if u > 0 {
            push(i - 1);
        }
        if u + 1 < w {
            push(i + 1);
        }
        if v > 0 {
            push(i - w);
        }
        if v + 1 < h {
            push(i + w);
        }
    }
    count == total
}

fn split_regions(config: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Result<Vec<usize>, ImageError> {
    let (w, h, n) = (config.width, config.height, config.n_planes);
    let mut map = vec![0usize; w * h];
    let min_area = (w * h) / (3 * n).max(1);
    let mut count = 1;

    if n >= 4 && rng.random_bool(config.cross_probability.clamp(0.0, 1.0)) {
        let pu = rng.random_range(w * 3 / 10..=w * 7 / 10) as i64;
        let pv = rng.random_range(h * 3 / 10..=h * 7 / 10) as i64;
        for v in 0..h {
            for u in 0..w {
                let right = u as i64 >= pu;
                let below = v as i64 >= pv;
                map[v * w + u] = (right as usize) + 2 * (below as usize);
            }
        }
        count = 4;
    }

    while count < n {
        let mut areas = vec![0usize; count];
        for &r in &map {
            areas[r] += 1;
        }
        // split the largest region; ties go to the lowest id
        let target = (0..count)
            .max_by_key(|&r| (areas[r], std::cmp::Reverse(r)))
            .expect("count >= 1");
        let pixels: Vec<usize> = (0..w * h).filter(|&i| map[i] == target).collect();
        let mut done = false;
        for _ in 0..MAX_SPLIT_ATTEMPTS {
            let kind = match rng.random_range(0..4) {
                0 => LineKind::Horizontal,
                1 => LineKind::Vertical,
                2 => LineKind::Diagonal,
                _ => LineKind::AntiDiagonal,
            };
            let anchor = pixels[rng.random_range(0..pixels.len())];
            let (pu, pv) = ((anchor % w) as i64, (anchor / w) as i64);
            let mut side_a = vec![false; w * h];
            let mut side_b = vec![false; w * h];
            for &i in &pixels {
                if kind.side((i % w) as i64, (i / w) as i64, pu, pv) {
                    side_a[i] = true;
                } else {
                    side_b[i] = true;
                }
            }
            let area_a = side_a.iter().filter(|&&b| b).count();
            let area_b = pixels.len() - area_a;
            if area_a < min_area || area_b < min_area {
                continue;
            }
            if !is_connected(&side_a, w, h) || !is_connected(&side_b, w, h) {
                continue;
            }
            for (i, &a) in side_a.iter().enumerate() {
                if a {
                    map[i] = count;
                }
            }
            count += 1;
            done = true;
            break;
        }
        if !done {
            return Err(ImageError::InfeasibleConfig(format!(
                "could not split region {target} into two regions of at least {min_area} pixels"
            )));
        }
    }
    Ok(map)
}

/// Pixels on the boundary of each region pair (both sides), keyed by `(r, s)` with `r < s`.
pub(crate) fn region_boundaries(
    map: &[usize],
    w: usize,
    h: usize,
) -> BTreeMap<(usize, usize), Vec<usize>> {
    let mut out: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for v in 0..h {
        for u in 0..w {
            let i = v * w + u;
            let r = map[i];
            let mut neighbors = [None; 4];
            if u > 0 {
                neighbors[0] = Some(i - 1);
            }
            if u + 1 < w {
                neighbors[1] = Some(i + 1);
            }
            if v > 0 {
                neighbors[2] = Some(i - w);
            }
            if v + 1 < h {
                neighbors[3] = Some(i + w);
            }
            for j in neighbors.into_iter().flatten() {
                let s = map[j];
                if s != r {
                    let list = out.entry((r.min(s), r.max(s))).or_default();
                    if list.last() != Some(&i) {
                        list.push(i);
                    }
                }
            }
        }
    }
    out
}

/// Pixels with another region within Chebyshev distance `< clearance`.
fn near_region_edge(map: &[usize], w: usize, h: usize, clearance: usize) -> Vec<bool> {
    let r = clearance.saturating_sub(1);
    let mut near = vec![false; w * h];
    for v in 0..h {
        for u in 0..w {
            let c = map[v * w + u];
            'window: for y in v.saturating_sub(r)..=(v + r).min(h - 1) {
                for x in u.saturating_sub(r)..=(u + r).min(w - 1) {
                    if map[y * w + x] != c {
                        near[v * w + u] = true;
                        break 'window;
                    }
                }
            }
        }
    }
    near
}

fn sample_planes(
    config: &SyntheticConfig,
    map: &[usize],
    boundaries: &BTreeMap<(usize, usize), Vec<usize>>,
    center: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Plane>, Vec<usize>), ImageError> {
    let (w, n) = (config.width, config.n_planes);
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    let base = 8.0;
    let slope = config.max_slope.abs();

    'attempt: for _ in 0..MAX_PLANE_ATTEMPTS {
        let planes: Vec<Plane> = (0..n)
            .map(|r| {
                let alpha = if slope > 0.0 {
                    rng.random_range(-slope..=slope)
                } else {
                    0.0
                };
                let beta = if slope > 0.0 {
                    rng.random_range(-slope..=slope)
                } else {
                    0.0
                };
                let gamma = base + config.depth_gap * rank[r] as f64 + rng.random_range(-0.5..=0.5);
                Plane::new(alpha, beta, gamma)
            })
            .collect();
        // disparities stay positive
        for (i, &r) in map.iter().enumerate() {
            let d = planes[r].disparity(((i % w) as f64, (i / w) as f64), center);
            if d < 1.0 {
                continue 'attempt;
            }
        }
        // nearer region leads by the margin along each shared boundary
        for (&(r, s), px) in boundaries {
            let (front, back) = if rank[r] > rank[s] { (r, s) } else { (s, r) };
            for &i in px {
                let p = ((i % w) as f64, (i / w) as f64);
                if planes[front].disparity(p, center) - planes[back].disparity(p, center)
                    < config.min_occlusion_margin
                {
                    continue 'attempt;
                }
            }
        }
        return Ok((planes, rank));
    }
    Err(ImageError::InfeasibleConfig(
        "no plane assignment satisfies the occlusion margin; lower max_slope or raise depth_gap"
            .into(),
    ))
}

/// A pixel is non-occluded when it projects inside the right view and no
/// nearer surface lands on the same right-view column.
fn visibility_mask(gt: &DisparityImage) -> Vec<Visibility> {
    let (w, h) = (gt.width(), gt.height());
    let mut mask = vec![Visibility::Occluded; w * h];
    let mut zbuf = vec![f32::NEG_INFINITY; w];
    for v in 0..h {
        zbuf.fill(f32::NEG_INFINITY);
        let column = |u: usize, d: f32| (u as f32 - d).round();
        for u in 0..w {
            let d = gt.get(u, v).expect("dense");
            let x = column(u, d);
            if x >= 0.0 && (x as usize) < w {
                let z = &mut zbuf[x as usize];
                *z = z.max(d);
            }
        }
        for u in 0..w {
            let d = gt.get(u, v).expect("dense");
            let x = column(u, d);
            if x >= 0.0 && (x as usize) < w && d >= zbuf[x as usize] - 0.5 {
                mask[v * w + u] = Visibility::NonOccluded;
            }
        }
    }
    mask
}

fn render_left(config: &SyntheticConfig, map: &[usize], rng: &mut ChaCha8Rng) -> Image {
    let n = config.n_planes;
    let mut palette: Vec<[i32; 3]> = Vec::with_capacity(n);
    let mut guard = 0;
    while palette.len() < n {
        let c = [
            LEVELS[rng.random_range(0..4)],
            LEVELS[rng.random_range(0..4)],
            LEVELS[rng.random_range(0..4)],
        ];
        // prefer colors two quantization levels apart in some channel
        let min_sep = if guard < 2000 { 128 } else { 64 };
        guard += 1;
        let distinct = palette
            .iter()
            .all(|p| (0..3).map(|k| (p[k] - c[k]).abs()).max().unwrap_or(0) >= min_sep);
        if distinct {
            palette.push(c);
        }
    }
    let mut data = Vec::with_capacity(map.len() * 3);
    for &r in map {
        for k in 0..3 {
            let noise = rng.random_range(-TEXTURE_AMPLITUDE..=TEXTURE_AMPLITUDE);
            data.push((palette[r][k] + noise).clamp(0, 255) as u8);
        }
    }
    Image::new(config.width, config.height, 3, data).expect("sized from config")
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    config: SyntheticConfig,
    plane_center: (f64, f64),
    depth_rank: Vec<usize>,
    planes: Vec<Plane>,
}

/// Writes a scene as `left.png`, `gt.pfm`, `mask.png`, `obs.pfm`,
/// `regions.png` (16-bit region ids), and `scene.toml`.
pub fn save_scene(scene: &SyntheticScene, dir: impl AsRef<Path>) -> Result<(), ImageError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let (w, h) = (scene.width(), scene.height());
    save_image(&scene.left, dir.join("left.png"))?;
    save_disparity(
        &scene.gt.disparity,
        dir.join("gt.pfm"),
        DisparityFormat::Pfm,
    )?;
    save_mask(&scene.gt.mask, w, h, dir.join("mask.png"))?;
    save_disparity(
        &scene.sparse_observations,
        dir.join("obs.pfm"),
        DisparityFormat::Pfm,
    )?;
    save_label_map(&scene.region_map, w, h, dir.join("regions.png"))?;
    let manifest = Manifest {
        config: scene.config.clone(),
        plane_center: scene.plane_center,
        depth_rank: scene.depth_rank.clone(),
        planes: scene.planes.clone(),
    };
    let text = toml::to_string_pretty(&manifest).map_err(|e| ImageError::Corrupt(e.to_string()))?;
    std::fs::write(dir.join("scene.toml"), text)?;
    Ok(())
}
