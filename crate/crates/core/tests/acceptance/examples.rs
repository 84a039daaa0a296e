//! Every worked example of the operation contracts whose expected value is
//! fixed by construction.

use std::path::Path;

use image::{ImageBuffer, Luma, Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slanted_stereo::harness::{
    boundary_error, error_rate, oracle_fit, rms, run_scaling_study, PipelineConfig, Scope,
    THRESHOLDS,
};
use slanted_stereo::imagery::{
    generate_synthetic, load_disparity, load_image, save_disparity, DisparityFormat,
    DisparityImage, GroundTruth, Image, ImageError, SyntheticConfig, Visibility,
};
use slanted_stereo::inference::{
    convex_bp, discretize, fit_plane, fit_planes_from_observations, initial_planes, pcbp,
    sample_particles, BpConfig, FactorGraph, PcbpConfig,
};
use slanted_stereo::matching::{match_stereo, passthrough, MatchConfig};
use slanted_stereo::model::{
    phi_bdy1, phi_bdy2, phi_color, phi_junction3, phi_junction4, phi_neg, phi_occ, phi_seg,
    plane_disparity, truncated_quadratic, BoundaryLabel, JunctionLabel, ModelParams, Moments,
    PairGeometry, Plane, StereoModel,
};
use slanted_stereo::segmentation::{
    color_histograms, connected_components, slic, Segmentation, SlicParams,
};

use crate::{Checks, Outcome};

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn gray_png(path: &Path, w: u32, h: u32, v: u8) {
    ImageBuffer::<Luma<u8>, _>::from_pixel(w, h, Luma([v]))
        .save(path)
        .unwrap();
}

fn png16(path: &Path, values: &[u16], w: u32) {
    let h = values.len() as u32 / w;
    ImageBuffer::<Luma<u16>, _>::from_raw(w, h, values.to_vec())
        .unwrap()
        .save(path)
        .unwrap();
}

fn raw_png16(path: &Path) -> Vec<u16> {
    image::open(path).unwrap().into_luma16().into_raw()
}

fn pfm_bytes(w: usize, h: usize, values: &[f32]) -> Vec<u8> {
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    // rows run bottom to top
    for v in (0..h).rev() {
        for x in &values[v * w..(v + 1) * w] {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn textured(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h * 3).map(|_| rng.random()).collect();
    Image::new(w, h, 3, data).unwrap()
}

fn map(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> Option<f32>) -> DisparityImage {
    let values = (0..w * h).map(|p| f(p % w, p / w)).collect();
    DisparityImage::from_values(w, h, values).unwrap()
}

/// Pixels of a `w`×`h` label map split into left and right halves.
fn halves(w: usize, h: usize) -> Vec<usize> {
    (0..w * h).map(|p| usize::from(p % w >= w / 2)).collect()
}

fn imagery(c: &mut Checks) {
    let dir = tmp();
    let p = dir.path();

    gray_png(&p.join("black.png"), 2, 2, 0);
    let img = load_image(p.join("black.png")).unwrap();
    c.check(
        "2x2 black grayscale decodes",
        img == Image::new(2, 2, 1, vec![0; 4]).unwrap(),
    );

    RgbImage::from_pixel(1, 1, Rgb([255, 255, 255]))
        .save(p.join("white.png"))
        .unwrap();
    let img = load_image(p.join("white.png")).unwrap();
    c.check(
        "1x1 white RGB decodes",
        img == Image::new(1, 1, 3, vec![255; 3]).unwrap(),
    );

    let noise = textured(32, 32, 1);
    RgbImage::from_raw(32, 32, noise.data().to_vec())
        .unwrap()
        .save(p.join("full.png"))
        .unwrap();
    let bytes = std::fs::read(p.join("full.png")).unwrap();
    std::fs::write(p.join("cut.png"), &bytes[..bytes.len() / 2]).unwrap();
    c.check(
        "truncated file is corrupt data",
        matches!(load_image(p.join("cut.png")), Err(ImageError::Corrupt(_))),
    );

    png16(&p.join("d.png"), &[512, 0], 2);
    let d = load_disparity(p.join("d.png"), DisparityFormat::Png16).unwrap();
    c.check("png16 512 reads 2.0", d.get(0, 0) == Some(2.0));
    c.check("png16 0 reads invalid", d.get(1, 0).is_none());

    std::fs::write(p.join("neg.pfm"), pfm_bytes(2, 1, &[-1.0, 3.5])).unwrap();
    let d = load_disparity(p.join("neg.pfm"), DisparityFormat::Pfm).unwrap();
    c.check(
        "pfm -1.0 reads invalid",
        d.get(0, 0).is_none() && d.get(1, 0) == Some(3.5),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = map(17, 9, |_, _| {
        rng.random_bool(0.8).then(|| rng.random_range(1e-3f32..1e4))
    });
    save_disparity(&m, p.join("r.pfm"), DisparityFormat::Pfm).unwrap();
    let back = load_disparity(p.join("r.pfm"), DisparityFormat::Pfm).unwrap();
    let bits = |d: &DisparityImage| -> Vec<Option<u32>> {
        d.values().iter().map(|v| v.map(f32::to_bits)).collect()
    };
    c.check("pfm round-trip is bit-identical", bits(&back) == bits(&m));

    // 300.0 and 257.0 exceed the 16-bit container (see the decisions ledger);
    // the out-of-range contract applies and the scale arithmetic is checked in range
    for big in [300.0f32, 257.0] {
        let r = save_disparity(
            &map(1, 1, |_, _| Some(big)),
            p.join("big.png"),
            DisparityFormat::Png16,
        );
        c.check(
            format!("png16 {big} is out of range"),
            matches!(r, Err(ImageError::OutOfRange { .. })),
        );
    }
    save_disparity(
        &map(1, 1, |_, _| Some(200.0)),
        p.join("s.png"),
        DisparityFormat::Png16,
    )
    .unwrap();
    c.check(
        "png16 200.0 stores 51200",
        raw_png16(&p.join("s.png")) == vec![51200],
    );
    let back = load_disparity(p.join("s.png"), DisparityFormat::Png16).unwrap();
    c.check("png16 200.0 reloads 200.0", back.get(0, 0) == Some(200.0));
    save_disparity(
        &map(1, 1, |_, _| Some(127.3)),
        p.join("q.png"),
        DisparityFormat::Png16,
    )
    .unwrap();
    let back = load_disparity(p.join("q.png"), DisparityFormat::Png16).unwrap();
    c.check(
        "png16 127.3 reloads within 1/256",
        back.get(0, 0)
            .is_some_and(|v| (v - 127.3).abs() <= 1.0 / 256.0),
    );

    let cfg = SyntheticConfig {
        width: 96,
        height: 64,
        seed: 7,
        ..SyntheticConfig::default()
    };
    let scene = generate_synthetic(&cfg).unwrap();
    let exact = scene
        .sparse_observations
        .iter_valid()
        .all(|(u, v, d)| scene.gt.disparity.get(u, v) == Some(d));
    c.check(
        "noise 0: observations equal ground truth",
        exact && scene.sparse_observations.valid_count() > 0,
    );
    let again = generate_synthetic(&cfg).unwrap();
    c.check(
        "same seed gives identical scenes",
        again.left == scene.left
            && again.gt == scene.gt
            && again.sparse_observations == scene.sparse_observations
            && again.region_map == scene.region_map
            && again.planes == scene.planes,
    );
}

fn segmentation(c: &mut Checks) {
    let img = Image::filled(16, 16, 3, 90).unwrap();
    let seg = slic(&img, &SlicParams::with_target(256));
    c.check(
        "n_target = pixel count is capped at pixels/16",
        seg.is_ok_and(|s| !s.is_empty() && s.len() <= 16),
    );

    let img = Image::filled(2, 2, 3, 0).unwrap();
    let seg = Segmentation::from_labels(vec![0, 1, 2, 3], &img).unwrap();
    let pairs: Vec<(usize, usize)> = seg.pairs.iter().map(|p| (p.i, p.j)).collect();
    c.check(
        "2x2 four labels: one 4-way junction, pairs 01 02 13 23",
        seg.junctions4.len() == 1 && pairs == vec![(0, 1), (0, 2), (1, 3), (2, 3)],
    );
    let seg = Segmentation::from_labels(vec![0, 0, 1, 2], &img).unwrap();
    let mut jp: Vec<(usize, usize)> = seg
        .junctions3
        .iter()
        .flat_map(|j| j.pairs.map(|k| (seg.pairs[k].i, seg.pairs[k].j)))
        .collect();
    jp.sort_unstable();
    c.check(
        "2x2 three labels: one 3-way junction over 01 02 12",
        seg.junctions3.len() == 1 && jp == vec![(0, 1), (0, 2), (1, 2)],
    );

    let mut data = Vec::new();
    for p in 0..8 * 4 {
        data.extend(if p % 8 < 4 {
            [200, 10, 10]
        } else {
            [10, 10, 200]
        });
    }
    let img = Image::new(8, 4, 3, data).unwrap();
    let one = vec![0; 32];
    let h = color_histograms(&img, &one, 1).unwrap();
    let mut bins = h[0].bins.to_vec();
    bins.sort_by(f64::total_cmp);
    c.check(
        "half red half blue: two bins at 0.5",
        bins[63] == 0.5 && bins[62] == 0.5 && bins[..62].iter().all(|&b| b == 0.0),
    );
    let h = color_histograms(&img, &halves(8, 4), 2).unwrap();
    let single = |b: &[f64; 64]| {
        b.iter().filter(|&&x| x == 1.0).count() == 1
            && b.iter().filter(|&&x| x == 0.0).count() == 63
    };
    c.check(
        "single-color segment: one bin at 1",
        single(&h[0].bins) && single(&h[1].bins),
    );
    let flat = Image::filled(8, 4, 3, 77).unwrap();
    let h = color_histograms(&flat, &halves(8, 4), 2).unwrap();
    c.check("identical colors: χ² = 0", h[0].chi_squared(&h[1]) == 0.0);
}

fn matching(c: &mut Checks) {
    let img = textured(48, 32, 3);
    let cfg = MatchConfig {
        max_disparity: 16,
        ..MatchConfig::default()
    };
    let d = match_stereo(&img, &img, &cfg).unwrap();
    c.check(
        "identical views: every valid disparity is 0",
        d.valid_count() > 0 && d.iter_valid().all(|(_, _, x)| x == 0.0),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = map(9, 7, |_, _| {
        rng.random_bool(0.5).then(|| rng.random_range(0.0f32..50.0))
    });
    c.check("passthrough is the identity", passthrough(&m) == m);

    let empty = DisparityImage::new_invalid(16, 16);
    let f = passthrough(&empty);
    let img = Image::filled(16, 16, 3, 50).unwrap();
    let seg = Segmentation::from_labels(halves(16, 16), &img).unwrap();
    let tolerated = StereoModel::new(seg, f.clone(), ModelParams::default())
        .ok()
        .and_then(|model| {
            let cfg = PcbpConfig {
                n_outer_iters: 1,
                n_particles: 3,
                ..PcbpConfig::default()
            };
            pcbp(&model, &cfg).ok()
        })
        .is_some_and(|s| s.energy.is_finite());
    c.check(
        "empty observations: empty F, downstream runs",
        f.valid_count() == 0 && tolerated,
    );

    let scene = generate_synthetic(&SyntheticConfig {
        width: 64,
        height: 48,
        seed: 5,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let f = passthrough(&scene.sparse_observations);
    c.check(
        "noise 0 passthrough: D = ground truth on F",
        f.iter_valid()
            .all(|(u, v, d)| scene.gt.disparity.get(u, v) == Some(d)),
    );
}

fn potentials(c: &mut Checks) {
    let p = ModelParams::default();
    let c0 = (100.0, 100.0);
    c.check(
        "plane (0,0,10) at its center is 10",
        plane_disparity(&Plane::new(0.0, 0.0, 10.0), c0, c0) == 10.0,
    );
    c.check(
        "plane (0.5,-0.25,12) at (104,96) is 15",
        plane_disparity(&Plane::new(0.5, -0.25, 12.0), (104.0, 96.0), c0) == 15.0,
    );
    c.check(
        "zero plane is 0 everywhere",
        plane_disparity(&Plane::new(0.0, 0.0, 0.0), (7.0, -3.0), c0) == 0.0,
    );

    c.check(
        "|diff| 2, K 5 costs 4",
        truncated_quadratic(12.0, 10.0, 5.0) == 4.0,
    );
    c.check(
        "|diff| 9, K 5 costs 25",
        truncated_quadratic(1.0, 10.0, 5.0) == 25.0,
    );
    c.check("diff 0 costs 0", truncated_quadratic(3.0, 3.0, 5.0) == 0.0);

    let y = Plane::new(0.5, -0.25, 12.0);
    let on: Vec<(f64, f64, f64)> = [(100.0, 100.0), (104.0, 96.0), (98.0, 102.0)]
        .iter()
        .map(|&(u, v)| (u, v, y.disparity((u, v), c0)))
        .collect();
    c.check(
        "observations on the plane cost 0",
        phi_seg(&y, c0, &on, 5.0) == 0.0,
    );
    c.check("no observations cost 0", phi_seg(&y, c0, &[], 5.0) == 0.0);
    let flat = Plane::fronto_parallel(10.0);
    let res = [(0.0, 0.0, 11.0), (1.0, 0.0, 8.0), (2.0, 0.0, 17.0)];
    c.check(
        "residuals 1 2 7 with K 5 cost 30",
        phi_seg(&flat, c0, &res, 5.0) == 30.0,
    );

    let yi = (&Plane::fronto_parallel(10.0), c0);
    let yj = (&Plane::fronto_parallel(8.0), c0);
    let band = [(0.0, 0.0, 10.0), (1.0, 0.0, 10.0)];
    c.check(
        "band on y_i, lo costs 0",
        phi_bdy1(BoundaryLabel::Lo, yi, yj, &band, 5.0) == 0.0,
    );
    c.check(
        "co with equal planes, band on both costs 0",
        phi_bdy1(BoundaryLabel::Co, yi, yi, &band, 5.0) == 0.0,
    );
    let one = [(0.0, 0.0, 11.0)];
    let yj3 = (&Plane::fronto_parallel(8.0), c0);
    c.check(
        "hi with residuals 1 and 3 costs 5",
        phi_bdy1(BoundaryLabel::Hi, yi, yj3, &one, 5.0) == 5.0,
    );

    let pts = [(0.0, 0.0), (5.0, 0.0), (5.0, 4.0), (0.0, 4.0)];
    let ten = (&Plane::fronto_parallel(10.0), c0);
    let five = (&Plane::fronto_parallel(5.0), c0);
    c.check(
        "front 10 over back 5 costs 0",
        phi_occ(ten, five, &pts, 30.0) == 0.0,
    );
    c.check("equal planes cost 0", phi_occ(ten, ten, &pts, 30.0) == 0.0);
    c.check(
        "plane (0,0,1) is not negative",
        phi_neg(&Plane::new(0.0, 0.0, 1.0), c0, &pts, 30.0) == 0.0,
    );

    let band_px: Vec<(usize, usize)> = (0..4).flat_map(|v| (2..6).map(move |u| (u, v))).collect();
    let left: Vec<(usize, usize)> = (0..4).flat_map(|v| (0..4).map(move |u| (u, v))).collect();
    let right: Vec<(usize, usize)> = (0..4).flat_map(|v| (4..8).map(move |u| (u, v))).collect();
    let g = PairGeometry {
        hull: slanted_stereo::model::convex_hull(&band_px),
        band: Moments::from_pixels(&band_px),
        union: Moments::from_pixels(&left).merge(&Moments::from_pixels(&right)),
    };
    let y = (&Plane::new(0.1, 0.2, 6.0), (1.5, 1.5));
    c.check(
        "equal non-negative planes, co costs 0",
        phi_bdy2(BoundaryLabel::Co, y, y, &g, &p) == 0.0,
    );

    use JunctionLabel::{Co, Hi};
    c.check(
        "3-way (co,co,co) costs 0",
        phi_junction3([Co, Co, Co], 30.0) == 0.0,
    );
    c.check(
        "4-way (hi,hi,hi,hi) costs 30",
        phi_junction4([Hi, Hi, Hi, Hi], 30.0) == 30.0,
    );

    let flat = Image::filled(8, 4, 3, 77).unwrap();
    let h = color_histograms(&flat, &halves(8, 4), 2).unwrap();
    c.check(
        "identical histograms, co costs 0",
        phi_color(BoundaryLabel::Co, &h[0], &h[1], &p) == 0.0,
    );
}

fn energy(c: &mut Checks) {
    let img = Image::filled(8, 4, 3, 77).unwrap();
    let plane = Plane::new(0.25, 0.0, 5.0);
    let on_plane = map(8, 4, |u, v| {
        Some(plane.disparity((u as f64, v as f64), (3.5, 1.5)) as f32)
    });

    let seg = Segmentation::from_labels(vec![0; 32], &img).unwrap();
    let model = StereoModel::new(seg, on_plane.clone(), ModelParams::default()).unwrap();
    c.check(
        "single segment on its plane has energy 0",
        model.total_energy(&[plane], &[]).unwrap() == 0.0,
    );

    let seg = Segmentation::from_labels(halves(8, 4), &img).unwrap();
    let planes: Vec<Plane> = seg
        .segments
        .iter()
        .map(|s| plane.recentered((3.5, 1.5), s.center))
        .collect();
    let model = StereoModel::new(seg, on_plane, ModelParams::default()).unwrap();
    c.check(
        "two coplanar identical segments have energy 0",
        model.total_energy(&planes, &[BoundaryLabel::Co]).unwrap() == 0.0,
    );
}

fn inference(c: &mut Checks) {
    let truth = Plane::new(0.3, -0.2, 9.0);
    let center = (4.0, 3.0);
    let pts: Vec<(f64, f64, f64)> = [(0.0, 0.0), (8.0, 1.0), (3.0, 6.0), (5.0, 5.0), (1.0, 4.0)]
        .iter()
        .map(|&(u, v)| (u, v, truth.disparity((u, v), center)))
        .collect();
    let fit = fit_plane(&pts, center).unwrap();
    c.check(
        "noiseless planar observations are recovered",
        (fit.alpha - truth.alpha).abs() < 1e-9
            && (fit.beta - truth.beta).abs() < 1e-9
            && (fit.gamma - truth.gamma).abs() < 1e-9,
    );

    let obs: Vec<Vec<(f64, f64, f64)>> = vec![
        vec![],
        vec![(0.0, 0.0, 4.0), (1.0, 0.0, 4.0)],
        vec![(0.0, 0.0, 6.0)],
        vec![(0.0, 0.0, 8.0), (1.0, 1.0, 8.0)],
    ];
    let refs: Vec<&[(f64, f64, f64)]> = obs.iter().map(Vec::as_slice).collect();
    let fitted = fit_planes_from_observations(
        &refs,
        &[(0.0, 0.0); 4],
        &[vec![1, 2, 3], vec![0], vec![0], vec![0]],
    );
    c.check(
        "no observations: median of neighbors {4,6,8}",
        fitted[0] == Plane::new(0.0, 0.0, 6.0),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let current = Plane::new(0.1, -0.3, 20.0);
    let ps = sample_particles(&current, (1e-12, 1e-12, 1e-12), 10, &mut rng);
    c.check(
        "σ 1e-12: all particles at the current plane",
        ps.iter().all(|q| {
            (q.alpha - current.alpha).abs() < 1e-9
                && (q.beta - current.beta).abs() < 1e-9
                && (q.gamma - current.gamma).abs() < 1e-9
        }),
    );
    let kept =
        (0..50).all(|_| sample_particles(&current, (0.5, 0.5, 5.0), 4, &mut rng)[0] == current);
    c.check("particle 0 is the input verbatim", kept);

    let scene = generate_synthetic(&SyntheticConfig {
        width: 64,
        height: 48,
        seed: 8,
        noise_sigma: 1.0,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let seg = slic(&scene.left, &SlicParams::with_target(20)).unwrap();
    let model = StereoModel::new(
        seg,
        scene.sparse_observations.clone(),
        ModelParams::default(),
    )
    .unwrap();
    let init = initial_planes(&model);
    let single: Vec<Vec<Plane>> = init.iter().map(|y| vec![*y]).collect();
    let d = discretize(&model, &single).unwrap();
    let g = &d.graph;
    c.check(
        "N = 1: plane variables have one state, labels four",
        (0..d.n_segments).all(|i| g.n_states(i) == 1)
            && (0..model.n_pairs()).all(|k| g.n_states(d.label_var(k)) == 4),
    );

    let img = Image::filled(8, 4, 3, 77).unwrap();
    let seg = Segmentation::from_labels(halves(8, 4), &img).unwrap();
    let two = StereoModel::new(
        seg,
        DisparityImage::new_invalid(8, 4),
        ModelParams::default(),
    )
    .unwrap();
    let pair = vec![vec![Plane::fronto_parallel(3.0), Plane::fronto_parallel(4.0)]; 2];
    let d = discretize(&two, &pair).unwrap();
    c.check(
        "two segments, N = 2: triplet table of 16",
        d.graph.factors[d.pair_factors[0]].table.len() == 16,
    );

    let mut g = FactorGraph::new();
    g.add_variable(vec![3.0, 1.0, 2.0]);
    let r = convex_bp(&g, &BpConfig::default()).unwrap();
    c.check(
        "single variable [3,1,2]: state 1, bound 1",
        r.assignment == vec![1] && r.bound == 1.0,
    );

    // one iteration with a single particle optimizes the labels of the
    // initial planes jointly; a 2x2 block layout is small enough to enumerate
    let cfg = PcbpConfig {
        n_particles: 1,
        n_outer_iters: 1,
        ..PcbpConfig::default()
    };
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let quads: Vec<usize> = (0..144)
            .map(|p| usize::from(p % 12 >= 6) + 2 * usize::from(p / 12 >= 6))
            .collect();
        let planes: Vec<Plane> = (0..4)
            .map(|_| {
                Plane::new(
                    rng.random_range(-0.3..0.3),
                    rng.random_range(-0.3..0.3),
                    rng.random_range(2.0..12.0),
                )
            })
            .collect();
        let obs = map(12, 12, |u, v| {
            let q = quads[v * 12 + u];
            rng.random_bool(0.5).then(|| {
                (planes[q].disparity((u as f64, v as f64), (6.0, 6.0))
                    + rng.random_range(-1.0..1.0))
                .max(0.0) as f32
            })
        });
        let img = textured(12, 12, rng.random());
        let seg = Segmentation::from_labels(quads, &img).unwrap();
        let small = StereoModel::new(seg, obs, ModelParams::default()).unwrap();
        let init = initial_planes(&small);
        let s = pcbp(&small, &cfg).unwrap();
        let n = small.n_pairs();
        let best = (0..4usize.pow(n as u32))
            .map(|code| {
                let l: Vec<BoundaryLabel> = (0..n)
                    .map(|k| BoundaryLabel::from_index((code >> (2 * k)) & 3))
                    .collect();
                small.total_energy(&init, &l).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        ok &= s.planes == init
            && s.energy == best
            && small.total_energy(&init, &s.labels).unwrap() == best;
    }
    c.check(
        "one iteration, N = 1: initial planes with their best labels",
        ok,
    );
    let s = pcbp(&model, &PcbpConfig::default()).unwrap();
    c.check(
        "energy is non-increasing over iterations",
        s.energy_trace().windows(2).all(|w| w[1] <= w[0]),
    );
}

fn metrics(c: &mut Checks) {
    let (w, h) = (10, 4);
    let gt_map = map(w, h, |u, v| Some((u + v) as f32 + 1.0));
    let gt = GroundTruth::new(gt_map.clone(), vec![Visibility::NonOccluded; w * h]).unwrap();
    let shifted = |off: &dyn Fn(usize, usize) -> f32| {
        map(w, h, |u, v| Some((u + v) as f32 + 1.0 + off(u, v)))
    };
    let rate = |e: &DisparityImage, t| error_rate(e, &gt, t, Scope::All).unwrap();
    c.check("est = gt: 0 %", rate(&gt_map, 3.0) == 0.0);
    c.check(
        "est = gt + 10, threshold 3: 100 %",
        rate(&shifted(&|_, _| 10.0), 3.0) == 100.0,
    );
    c.check(
        "half off by 10, threshold 5: 50 %",
        rate(&shifted(&|u, _| if u < 5 { 10.0 } else { 0.0 }), 5.0) == 50.0,
    );

    c.check(
        "rms of est = gt is 0",
        rms(&gt_map, &gt_map).unwrap() == 0.0,
    );
    c.check(
        "rms of constant offset 2 is 2",
        rms(&shifted(&|_, _| 2.0), &gt_map).unwrap() == 2.0,
    );
    let four = map(4, 1, |_, _| Some(1.0));
    let offs = map(4, 1, |u, _| Some(if u == 3 { 5.0 } else { 1.0 }));
    c.check(
        "rms of offsets 0 0 0 4 is 2",
        rms(&offs, &four).unwrap() == 2.0,
    );

    let a = vec![BoundaryLabel::Co; 20];
    let mut b = a.clone();
    c.check(
        "identical labels: 0 %",
        boundary_error(&a, &b).unwrap() == 0.0,
    );
    b[7] = BoundaryLabel::Hi;
    c.check("1 of 20 wrong: 5 %", boundary_error(&a, &b).unwrap() == 5.0);
    let all = vec![BoundaryLabel::Lo; 20];
    c.check(
        "all different: 100 %",
        boundary_error(&a, &all).unwrap() == 100.0,
    );
}

fn harness(c: &mut Checks) {
    let scene = generate_synthetic(&SyntheticConfig {
        width: 96,
        height: 64,
        seed: 11,
        ..SyntheticConfig::default()
    })
    .unwrap();
    let (w, h) = (scene.left.width(), scene.left.height());
    let aligned = connected_components(&scene.region_map, w, h);
    let seg = Segmentation::from_labels(aligned, &scene.left).unwrap();
    let (_, _, report) = oracle_fit(&scene.gt, &seg, &ModelParams::default()).unwrap();
    let zero = |v: &[f64]| v.iter().all(|&x| x == 0.0 || x.is_nan());
    c.check(
        "oracle on aligned segments: 0 % at every threshold",
        report.thresholds == THRESHOLDS
            && zero(&report.non_occluded)
            && report.all.iter().all(|&x| x == 0.0),
    );

    let cfg = PipelineConfig::default();
    let rows = run_scaling_study(
        &scene.left,
        &scene.sparse_observations,
        Some(&scene.gt),
        &[30],
        &cfg,
    )
    .unwrap();
    let mut text = Vec::new();
    slanted_stereo::harness::write_scaling_table(&rows, &mut text).unwrap();
    c.check(
        "single count: single-row table",
        rows.len() == 1 && String::from_utf8(text).unwrap().lines().count() == 2,
    );
}

pub fn criterion() -> Outcome {
    let mut c = Checks::default();
    imagery(&mut c);
    segmentation(&mut c);
    matching(&mut c);
    potentials(&mut c);
    energy(&mut c);
    inference(&mut c);
    metrics(&mut c);
    harness(&mut c);
    c.finish("examples")
}
