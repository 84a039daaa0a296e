use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{connected_components, Segmentation, SegmentationError};
use crate::imagery::Image;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicParams {
    /// Requested number of superpixels; capped at `pixels / 16`.
    pub n_target: usize,
    /// Weight of spatial distance relative to Lab distance.
    pub compactness: f64,
    pub iters: usize,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            n_target: 100,
            compactness: 10.0,
            iters: 10,
        }
    }
}

impl SlicParams {
    pub fn with_target(n_target: usize) -> Self {
        Self {
            n_target,
            ..Self::default()
        }
    }
}

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// CIELAB (D65) of every pixel.
fn to_lab(image: &Image) -> Vec<[f64; 3]> {
    let lut: Vec<f64> = (0..=255u8).map(srgb_to_linear).collect();
    let w = image.width();
    (0..image.pixel_count())
        .map(|i| {
            let [r, g, b] = image.rgb(i % w, i / w).map(|c| lut[c as usize]);
            let x = (0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b) / 0.950_47;
            let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
            let z = (0.019_333_9 * r + 0.119_192 * g + 0.950_304_1 * b) / 1.088_83;
            let (fx, fy, fz) = (lab_f(x), lab_f(y), lab_f(z));
            [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
        })
        .collect()
}

#[derive(Clone, Copy)]
struct Center {
    lab: [f64; 3],
    u: f64,
    v: f64,
}

/// SLIC superpixels: k-means in (L, a, b, u, v) from a regular grid, then
/// 4-connectivity enforcement that folds fragments smaller than a quarter of
/// the mean superpixel area into their largest neighbor. Deterministic.
pub fn slic(image: &Image, params: &SlicParams) -> Result<Segmentation, SegmentationError> {
    let (w, h) = (image.width(), image.height());
    let n_pixels = w * h;
    if params.n_target > n_pixels {
        return Err(SegmentationError::TooManySegments {
            requested: params.n_target,
            pixels: n_pixels,
        });
    }
    let n = params.n_target.min(n_pixels / 16).max(1);
    let lab = to_lab(image);

    // grid with roughly square cells
    let nx = ((n as f64 * w as f64 / h as f64).sqrt().round() as usize).clamp(1, w);
    let ny = ((n as f64 / nx as f64).round() as usize).clamp(1, h);
    let step = (n_pixels as f64 / (nx * ny) as f64).sqrt();
    let (cw, ch) = (w as f64 / nx as f64, h as f64 / ny as f64);

    let gradient = |u: usize, v: usize| -> f64 {
        if u == 0 || v == 0 || u + 1 >= w || v + 1 >= h {
            return f64::INFINITY;
        }
        let d =
            |a: usize, b: usize| -> f64 { (0..3).map(|c| (lab[a][c] - lab[b][c]).powi(2)).sum() };
        let i = v * w + u;
        d(i + 1, i - 1) + d(i + w, i - w)
    };
    let mut centers: Vec<Center> = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let u0 = (((ix as f64 + 0.5) * cw) as usize).min(w - 1);
            let v0 = (((iy as f64 + 0.5) * ch) as usize).min(h - 1);
            // nudge off edges to the lowest-gradient pixel of the 3x3 neighborhood
            let (mut bu, mut bv, mut bg) = (u0, v0, gradient(u0, v0));
            for v in v0.saturating_sub(1)..=(v0 + 1).min(h - 1) {
                for u in u0.saturating_sub(1)..=(u0 + 1).min(w - 1) {
                    let g = gradient(u, v);
                    if g < bg {
                        (bu, bv, bg) = (u, v, g);
                    }
                }
            }
            centers.push(Center {
                lab: lab[bv * w + bu],
                u: bu as f64,
                v: bv as f64,
            });
        }
    }

    // start from the grid cells so pixels outside every window stay labelled
    let mut labels: Vec<usize> = (0..n_pixels)
        .map(|i| {
            let ix = (((i % w) as f64 / cw) as usize).min(nx - 1);
            let iy = (((i / w) as f64 / ch) as usize).min(ny - 1);
            iy * nx + ix
        })
        .collect();
    let spatial = (params.compactness / step).powi(2);
    let reach = step.ceil() as isize;
    let mut dist = vec![f64::INFINITY; n_pixels];
    for _ in 0..params.iters {
        dist.fill(f64::INFINITY);
        for (k, c) in centers.iter().enumerate() {
            let (cu, cv) = (c.u.round() as isize, c.v.round() as isize);
            let u0 = (cu - reach).max(0) as usize;
            let u1 = ((cu + reach) as usize).min(w - 1);
            let v0 = (cv - reach).max(0) as usize;
            let v1 = ((cv + reach) as usize).min(h - 1);
            for v in v0..=v1 {
                for u in u0..=u1 {
                    let i = v * w + u;
                    let p = &lab[i];
                    let dc = (p[0] - c.lab[0]).powi(2)
                        + (p[1] - c.lab[1]).powi(2)
                        + (p[2] - c.lab[2]).powi(2);
                    let ds = (u as f64 - c.u).powi(2) + (v as f64 - c.v).powi(2);
                    let d = dc + spatial * ds;
                    if d < dist[i] {
                        dist[i] = d;
                        labels[i] = k;
                    }
                }
            }
        }
        let mut acc = vec![[0.0f64; 6]; centers.len()];
        for (i, &k) in labels.iter().enumerate() {
            let a = &mut acc[k];
            a[0] += lab[i][0];
            a[1] += lab[i][1];
            a[2] += lab[i][2];
            a[3] += (i % w) as f64;
            a[4] += (i / w) as f64;
            a[5] += 1.0;
        }
        for (c, a) in centers.iter_mut().zip(&acc) {
            if a[5] > 0.0 {
                *c = Center {
                    lab: [a[0] / a[5], a[1] / a[5], a[2] / a[5]],
                    u: a[3] / a[5],
                    v: a[4] / a[5],
                };
            }
        }
    }

    let min_area = n_pixels / (4 * centers.len()).max(1);
    let labels = enforce_connectivity(&labels, &lab, w, h, min_area);
    Segmentation::from_labels(labels, image)
}

/// Splits labels into 4-connected components, merges every component below
/// `min_area` into the neighbor with the closest mean color (smallest
/// fragments first), and relabels densely in raster order.
fn enforce_connectivity(
    labels: &[usize],
    lab: &[[f64; 3]],
    w: usize,
    h: usize,
    min_area: usize,
) -> Vec<usize> {
    let comp = connected_components(labels, w, h);
    let n = comp.iter().max().map_or(0, |m| m + 1);
    let mut size = vec![0usize; n];
    let mut color_sum = vec![[0.0f64; 3]; n];
    for (&c, p) in comp.iter().zip(lab) {
        size[c] += 1;
        for k in 0..3 {
            color_sum[c][k] += p[k];
        }
    }
    let color_dist = |sum: &[[f64; 3]], size: &[usize], a: usize, b: usize| -> f64 {
        (0..3)
            .map(|k| (sum[a][k] / size[a] as f64 - sum[b][k] / size[b] as f64).powi(2))
            .sum()
    };
    let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for v in 0..h {
        for u in 0..w {
            let a = comp[v * w + u];
            for b in [
                (u + 1 < w).then(|| comp[v * w + u + 1]),
                (v + 1 < h).then(|| comp[(v + 1) * w + u]),
            ]
            .into_iter()
            .flatten()
            {
                if a != b {
                    neighbors[a].insert(b);
                    neighbors[b].insert(a);
                }
            }
        }
    }

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut order: Vec<usize> = (0..n).filter(|&c| size[c] < min_area).collect();
    order.sort_by_key(|&c| (size[c], c));
    for c in order {
        let r = find(&mut parent, c);
        if size[r] >= min_area {
            continue;
        }
        let candidates: Vec<usize> = neighbors[r].iter().copied().collect();
        let mut best: Option<(f64, usize)> = None;
        for b in candidates {
            let rb = find(&mut parent, b);
            if rb == r {
                continue;
            }
            let d = color_dist(&color_sum, &size, r, rb);
            if best.is_none_or(|(bd, t)| d < bd || (d == bd && (size[rb], t) > (size[t], rb))) {
                best = Some((d, rb));
            }
        }
        let Some((_, t)) = best else { continue };
        parent[r] = t;
        size[t] += size[r];
        for k in 0..3 {
            color_sum[t][k] += color_sum[r][k];
        }
        let moved = std::mem::take(&mut neighbors[r]);
        neighbors[t].extend(moved);
    }
    let merged: Vec<usize> = comp.iter().map(|&c| find(&mut parent, c)).collect();
    connected_components(&merged, w, h)
}
