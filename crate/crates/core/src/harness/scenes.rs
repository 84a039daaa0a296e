use super::{ErrorReport, HarnessError, THRESHOLDS};
use crate::imagery::{GroundTruth, SyntheticScene};
use crate::inference::fit_initial_planes;
use crate::model::{BoundaryLabel, ModelParams, Plane, StereoModel};
use crate::segmentation::Segmentation;

/// Mean |Δd| along a band below which two different regions count as a hinge.
pub const HINGE_TOLERANCE: f64 = 0.5;

/// Majority region of every segment (ties to the lower region id).
pub fn segment_regions(scene: &SyntheticScene, seg: &Segmentation) -> Vec<usize> {
    let n_regions = scene.planes.len();
    let w = scene.width();
    seg.segments
        .iter()
        .map(|s| {
            let mut votes = vec![0usize; n_regions];
            for &(u, v) in &s.pixels {
                votes[scene.region_map[v * w + u]] += 1;
            }
            let mut best = 0;
            for (r, &c) in votes.iter().enumerate() {
                if c > votes[best] {
                    best = r;
                }
            }
            best
        })
        .collect()
}

/// Region plane of every segment, re-expressed around the segment center.
pub fn gt_segment_planes(scene: &SyntheticScene, seg: &Segmentation) -> Vec<Plane> {
    segment_regions(scene, seg)
        .into_iter()
        .zip(&seg.segments)
        .map(|(r, s)| scene.planes[r].recentered(scene.plane_center, s.center))
        .collect()
}

/// Reference labels from the generator geometry: `co` within one region,
/// `hi` when the two region planes differ by less than
/// [`HINGE_TOLERANCE`] on average over the band, otherwise the side with the
/// larger mean band disparity occludes.
pub fn gt_labels(scene: &SyntheticScene, seg: &Segmentation) -> Vec<BoundaryLabel> {
    let regions = segment_regions(scene, seg);
    seg.pairs
        .iter()
        .map(|p| {
            let (ri, rj) = (regions[p.i], regions[p.j]);
            if ri == rj {
                return BoundaryLabel::Co;
            }
            let n = p.band.len() as f64;
            let (mut diff, mut abs) = (0.0, 0.0);
            for &(u, v) in &p.band {
                let d = scene.region_disparity(ri, u as f64, v as f64)
                    - scene.region_disparity(rj, u as f64, v as f64);
                diff += d;
                abs += d.abs();
            }
            if abs / n < HINGE_TOLERANCE {
                BoundaryLabel::Hi
            } else if diff > 0.0 {
                BoundaryLabel::Lo
            } else {
                BoundaryLabel::Ro
            }
        })
        .collect()
}

/// Model fitted to ground truth: robust plane per segment from the GT
/// disparities, then per pair the label minimizing the compatibility term.
pub fn oracle_fit(
    gt: &GroundTruth,
    seg: &Segmentation,
    params: &ModelParams,
) -> Result<(Vec<Plane>, Vec<BoundaryLabel>, ErrorReport), HarnessError> {
    let planes = fit_initial_planes(seg, &gt.disparity);
    let model = StereoModel::new(seg.clone(), gt.disparity.clone(), *params)?;
    let labels = seg
        .pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut best = (f64::INFINITY, BoundaryLabel::Co);
            for o in BoundaryLabel::ALL {
                let c = model.bdy2(k, o, &planes[p.i], &planes[p.j]);
                if c < best.0 {
                    best = (c, o);
                }
            }
            best.1
        })
        .collect();
    let report = ErrorReport::compute(&model.dense_disparity(&planes), gt, &THRESHOLDS)?;
    Ok((planes, labels, report))
}
