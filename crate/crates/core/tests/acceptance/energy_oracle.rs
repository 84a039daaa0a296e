//! Randomized small instances scored three ways: by the model, by a
//! re-summation of the free potential functions over independently gathered
//! inputs (must agree exactly), and by a per-pixel evaluation that shares no
//! code with the library (must agree to rounding).

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slanted_stereo::imagery::{DisparityImage, Image};
use slanted_stereo::model::{
    convex_hull, phi_bdy1, phi_bdy2, phi_color, phi_junction3, phi_junction4, phi_seg,
    BoundaryLabel, JunctionLabel, ModelParams, Moments, ObsPoint, PairGeometry, Plane, StereoModel,
    Weights,
};
use slanted_stereo::segmentation::{connected_components, Segmentation};

use crate::junctions::{impossible3_class, valid4, Kind};
use crate::{Checks, Outcome};

pub struct Instance {
    pub image: Image,
    pub seg: Segmentation,
    pub obs: DisparityImage,
    pub params: ModelParams,
    pub planes: Vec<Plane>,
    pub labels: Vec<BoundaryLabel>,
}

fn cuts(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let k = rng.random_range(1..=3);
    let mut c: Vec<usize> = (0..k).map(|_| rng.random_range(2..n - 1)).collect();
    c.sort_unstable();
    c.dedup();
    c
}

/// Voronoi cells (3-way junctions) or a grid of blocks (4-way junctions).
fn random_labels(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Vec<usize> {
    let raw: Vec<usize> = if rng.random_bool(0.5) {
        let k = rng.random_range(2..=7);
        let sites: Vec<(f64, f64)> = (0..k)
            .map(|_| {
                (
                    rng.random_range(0.0..w as f64),
                    rng.random_range(0.0..h as f64),
                )
            })
            .collect();
        (0..w * h)
            .map(|p| {
                let (u, v) = ((p % w) as f64, (p / w) as f64);
                let d = |s: &(f64, f64)| (s.0 - u).powi(2) + (s.1 - v).powi(2);
                (0..k)
                    .min_by(|&a, &b| d(&sites[a]).total_cmp(&d(&sites[b])))
                    .unwrap()
            })
            .collect()
    } else {
        let (cols, rows) = (cuts(rng, w), cuts(rng, h));
        (0..w * h)
            .map(|p| {
                let cu = cols.iter().filter(|&&c| p % w >= c).count();
                let cv = rows.iter().filter(|&&r| p / w >= r).count();
                cv * (cols.len() + 1) + cu
            })
            .collect()
    };
    connected_components(&raw, w, h)
}

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let hinge = rng.random_range(0.5..5.0);
    let mut weight = || {
        if rng.random_bool(0.2) {
            0.0
        } else {
            rng.random_range(0.1..3.0)
        }
    };
    let weights = Weights {
        seg: weight(),
        bdy1: weight(),
        bdy2: weight(),
        jct3: weight(),
        crs4: weight(),
        col: weight(),
    };
    ModelParams {
        k: rng.random_range(0.5..8.0),
        lambda_occ: hinge + rng.random_range(0.1..20.0),
        lambda_hinge: hinge,
        lambda_imp: rng.random_range(0.0..50.0),
        lambda_col: rng.random_range(0.0..50.0),
        kappa: rng.random_range(0.0..100.0),
        weights,
    }
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let (w, h) = (rng.random_range(5..=14), rng.random_range(5..=12));
    let labels = random_labels(rng, w, h);
    let n = labels.iter().max().unwrap() + 1;
    // a few segments share a palette color so χ² is sometimes small
    let palette: Vec<[u8; 3]> = (0..n)
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    let palette: Vec<[u8; 3]> = (0..n)
        .map(|i| {
            if i > 0 && rng.random_bool(0.3) {
                palette[i - 1]
            } else {
                palette[i]
            }
        })
        .collect();
    let mut data = Vec::with_capacity(w * h * 3);
    for &l in &labels {
        for ch in palette[l] {
            let jitter = if rng.random_bool(0.2) {
                rng.random_range(0..80)
            } else {
                0
            };
            data.push(ch.saturating_add(jitter));
        }
    }
    let image = Image::new(w, h, 3, data).unwrap();
    let seg = Segmentation::from_labels(labels, &image).unwrap();

    let planes: Vec<Plane> = (0..n)
        .map(|_| {
            if rng.random_bool(0.15) {
                Plane::fronto_parallel(rng.random_range(0.0..10.0))
            } else {
                Plane::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-3.0..15.0),
                )
            }
        })
        .collect();
    let p_valid = rng.random_range(0.0..0.9);
    let values = (0..w * h)
        .map(|_| {
            rng.random_bool(p_valid)
                .then(|| rng.random_range(0.0f32..20.0))
        })
        .collect();
    let obs = DisparityImage::from_values(w, h, values).unwrap();
    let labels = (0..seg.pairs.len())
        .map(|_| BoundaryLabel::from_index(rng.random_range(0..4)))
        .collect();
    Instance {
        image,
        seg,
        obs,
        params: random_params(rng),
        planes,
        labels,
    }
}

fn gather(obs: &DisparityImage, pixels: &[(usize, usize)]) -> Vec<ObsPoint> {
    pixels
        .iter()
        .filter_map(|&(u, v)| obs.get(u, v).map(|d| (u as f64, v as f64, d as f64)))
        .collect()
}

/// Sum of the free potential functions in the order the energy is defined.
pub fn resum(x: &Instance) -> f64 {
    let (seg, p) = (&x.seg, &x.params);
    let w = &p.weights;
    let c = |i: usize| seg.segments[i].center;
    let mut data = 0.0;
    for (i, y) in x.planes.iter().enumerate() {
        data += phi_seg(y, c(i), &gather(&x.obs, &seg.segments[i].pixels), p.k);
    }
    let mut e = w.seg * data;
    let moments: Vec<Moments> = seg
        .segments
        .iter()
        .map(|s| Moments::from_pixels(&s.pixels))
        .collect();
    for (k, pr) in seg.pairs.iter().enumerate() {
        let o = x.labels[k];
        let yi = (&x.planes[pr.i], c(pr.i));
        let yj = (&x.planes[pr.j], c(pr.j));
        let g = PairGeometry {
            hull: convex_hull(&pr.band),
            band: Moments::from_pixels(&pr.band),
            union: moments[pr.i].merge(&moments[pr.j]),
        };
        let b1 = phi_bdy1(o, yi, yj, &gather(&x.obs, &pr.band), p.k);
        let b2 = phi_bdy2(o, yi, yj, &g, p);
        let col = phi_color(
            o,
            &seg.segments[pr.i].histogram,
            &seg.segments[pr.j].histogram,
            p,
        );
        e += w.bdy1 * b1 + w.bdy2 * b2 + w.col * col;
    }
    let relabel = |o: BoundaryLabel, a: usize, b: usize| JunctionLabel::from_pair(o, a > b);
    let mut j3 = 0.0;
    for j in &seg.junctions3 {
        let l = std::array::from_fn(|m| {
            relabel(x.labels[j.pairs[m]], j.segments[m], j.segments[(m + 1) % 3])
        });
        j3 += phi_junction3(l, p.lambda_imp);
    }
    e += w.jct3 * j3;
    let mut j4 = 0.0;
    for j in &seg.junctions4 {
        let l = std::array::from_fn(|m| {
            relabel(x.labels[j.pairs[m]], j.segments[m], j.segments[(m + 1) % 4])
        });
        j4 += phi_junction4(l, p.lambda_imp);
    }
    e += w.crs4 * j4;
    e
}

fn histogram(img: &Image, pixels: &[(usize, usize)]) -> [f64; 64] {
    let mut h = [0.0; 64];
    for &(u, v) in pixels {
        let [r, g, b] = img.rgb(u, v);
        h[(r as usize / 64) * 16 + (g as usize / 64) * 4 + b as usize / 64] += 1.0;
    }
    h.map(|x| x / pixels.len() as f64)
}

fn chi2(a: &[f64; 64], b: &[f64; 64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .filter(|(x, y)| *x + *y > 0.0)
        .map(|(x, y)| (x - y).powi(2) / (x + y))
        .sum::<f64>()
}

/// Every term straight from its definition, pixel by pixel.
pub fn direct(x: &Instance) -> f64 {
    let (seg, p) = (&x.seg, &x.params);
    let w = &p.weights;
    let d = |k: usize, (u, v): (usize, usize)| {
        let c = seg.segments[k].center;
        let y = &x.planes[k];
        y.alpha * (u as f64 - c.0) + y.beta * (v as f64 - c.1) + y.gamma
    };
    let tq = |r: f64| r.abs().min(p.k).powi(2);
    let data = |k: usize, pixels: &[(usize, usize)]| -> f64 {
        pixels
            .iter()
            .filter_map(|&q| x.obs.get(q.0, q.1).map(|o| tq(o as f64 - d(k, q))))
            .sum()
    };
    let n = seg.segments.len();
    let mut e = w.seg
        * (0..n)
            .map(|k| data(k, &seg.segments[k].pixels))
            .sum::<f64>();
    for (m, pr) in seg.pairs.iter().enumerate() {
        let (i, j, band) = (pr.i, pr.j, &pr.band);
        let o = x.labels[m];
        let bdy1 = match o {
            BoundaryLabel::Lo => data(i, band),
            BoundaryLabel::Ro => data(j, band),
            _ => 0.5 * (data(i, band) + data(j, band)),
        };
        let negative = |a: usize| band.iter().any(|&q| d(a, q) < 0.0);
        let behind = |f: usize, b: usize| band.iter().any(|&q| d(f, q) < d(b, q));
        let imp = |hit: bool| if hit { p.lambda_imp } else { 0.0 };
        let negs = imp(negative(i)) + imp(negative(j));
        let msd = |pixels: &[(usize, usize)]| {
            pixels
                .iter()
                .map(|&q| (d(i, q) - d(j, q)).powi(2))
                .sum::<f64>()
                / pixels.len() as f64
        };
        let bdy2 = match o {
            BoundaryLabel::Lo => p.lambda_occ + negs + imp(behind(i, j)),
            BoundaryLabel::Ro => p.lambda_occ + negs + imp(behind(j, i)),
            BoundaryLabel::Hi => p.lambda_hinge + negs + msd(band),
            BoundaryLabel::Co => {
                let union: Vec<(usize, usize)> = seg.segments[i]
                    .pixels
                    .iter()
                    .chain(&seg.segments[j].pixels)
                    .copied()
                    .collect();
                negs + msd(&union)
            }
        };
        let col = match o {
            BoundaryLabel::Co => {
                let x2 = chi2(
                    &histogram(&x.image, &seg.segments[i].pixels),
                    &histogram(&x.image, &seg.segments[j].pixels),
                );
                (p.kappa * x2).min(p.lambda_col)
            }
            _ => p.lambda_col,
        };
        e += w.bdy1 * bdy1 + w.bdy2 * bdy2 + w.col * col;
    }
    let kind = |a: usize, b: usize| {
        let k = seg
            .pair_between(a, b)
            .expect("junction segments are neighbors");
        let pr = &seg.pairs[k];
        match x.labels[k] {
            BoundaryLabel::Co => Kind::Co,
            BoundaryLabel::Hi => Kind::Hi,
            BoundaryLabel::Lo => Kind::Occ { front: pr.i },
            BoundaryLabel::Ro => Kind::Occ { front: pr.j },
        }
    };
    let j3 = seg
        .junctions3
        .iter()
        .filter(|j| {
            let s = j.segments;
            impossible3_class(s, std::array::from_fn(|m| kind(s[m], s[(m + 1) % 3]))).is_some()
        })
        .count();
    e += w.jct3 * (j3 as f64 * p.lambda_imp);
    let j4 = seg
        .junctions4
        .iter()
        .filter(|j| {
            let s = j.segments;
            !valid4(s, std::array::from_fn(|m| kind(s[m], s[(m + 1) % 4])))
        })
        .count();
    e += w.crs4 * (j4 as f64 * p.lambda_imp);
    e
}

/// Neighbor pairs and junction sites read off the label map.
fn structure_matches(x: &Instance) -> bool {
    let seg = &x.seg;
    let (w, h) = (seg.width(), seg.height());
    let l = |u: usize, v: usize| seg.label(u, v);
    let mut pairs = BTreeSet::new();
    let mut windows4 = HashSet::new();
    let mut windows3 = HashSet::new();
    for v in 0..h {
        for u in 0..w {
            if u + 1 < w && l(u, v) != l(u + 1, v) {
                pairs.insert((l(u, v).min(l(u + 1, v)), l(u, v).max(l(u + 1, v))));
            }
            if v + 1 < h && l(u, v) != l(u, v + 1) {
                pairs.insert((l(u, v).min(l(u, v + 1)), l(u, v).max(l(u, v + 1))));
            }
            if u + 1 < w && v + 1 < h {
                let win = [l(u, v), l(u + 1, v), l(u + 1, v + 1), l(u, v + 1)];
                let mut set: Vec<usize> = win.to_vec();
                set.sort_unstable();
                set.dedup();
                match set.len() {
                    4 => {
                        windows4.insert(win);
                    }
                    // a window whose repeated label sits on the diagonal is not a junction
                    3 if (0..4).any(|k| win[k] == win[(k + 1) % 4]) => {
                        windows3.insert(set);
                    }
                    _ => {}
                }
            }
        }
    }
    let got: BTreeSet<(usize, usize)> = seg.pairs.iter().map(|p| (p.i, p.j)).collect();
    let pairs_ok = got == pairs && got.len() == seg.pairs.len();
    let j4_ok = seg
        .junctions4
        .iter()
        .all(|j| windows4.contains(&j.segments));
    let j3_ok = seg.junctions3.iter().all(|j| {
        let mut s = j.segments.to_vec();
        s.sort_unstable();
        windows3.contains(&s)
    });
    let windows3_covered = windows3.iter().all(|s| {
        seg.junctions3.iter().any(|j| {
            let mut t = j.segments.to_vec();
            t.sort_unstable();
            &t == s
        })
    });
    let sorted = |s: [usize; 4]| {
        let mut t = s;
        t.sort_unstable();
        t
    };
    let windows4_covered = windows4.iter().all(|&win| {
        seg.junctions4
            .iter()
            .any(|j| sorted(j.segments) == sorted(win))
    });
    pairs_ok && j4_ok && j3_ok && windows3_covered && windows4_covered
}

pub fn criterion() -> Outcome {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut c = Checks::default();
    let (mut n3, mut n4) = (0, 0);
    for case in 0..1000 {
        let x = random_instance(&mut rng);
        n3 += x.seg.junctions3.len();
        n4 += x.seg.junctions4.len();
        let model = StereoModel::new(x.seg.clone(), x.obs.clone(), x.params).unwrap();
        let e = model.total_energy(&x.planes, &x.labels).unwrap();
        let r = resum(&x);
        c.check(
            format!("case {case}: model {e} vs re-summation {r}"),
            e == r,
        );
        let dd = direct(&x);
        c.check(
            format!("case {case}: model {e} vs direct {dd}"),
            (e - dd).abs() <= 1e-9 * (1.0 + e.abs()),
        );
        c.check(
            format!("case {case}: neighbor structure"),
            structure_matches(&x),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(format!("runtime {secs:.2} s < 10 s"), secs < 10.0);
    c.check(
        format!("{n3} 3-way and {n4} 4-way junctions exercised"),
        n3 > 0 && n4 > 0,
    );
    c.finish(&format!(
        "instance checks ({n3} 3-way, {n4} 4-way junctions)"
    ))
}
