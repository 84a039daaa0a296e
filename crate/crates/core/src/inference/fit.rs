use nalgebra::{Matrix3, Vector3};

use crate::imagery::DisparityImage;
use crate::model::{ObsPoint, Plane};
use crate::segmentation::Segmentation;

/// Reweighting rounds after the least-squares start.
const IRLS_ROUNDS: usize = 5;
/// Huber tuning constant for unit-variance noise.
const HUBER_C: f64 = 1.345;
/// Smallest Huber threshold, pixels.
const MIN_DELTA: f64 = 1e-3;

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Weighted least squares in center-relative coordinates.
fn solve(points: &[ObsPoint], center: (f64, f64), weights: &[f64]) -> Option<Plane> {
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    for (&(u, v, d), &w) in points.iter().zip(weights) {
        let x = Vector3::new(u - center.0, v - center.1, 1.0);
        a += w * x * x.transpose();
        b += w * d * x;
    }
    let sol = a.cholesky()?.solve(&b);
    let y = Plane::new(sol[0], sol[1], sol[2]);
    y.is_finite().then_some(y)
}

/// `true` when the pixel positions span a plane (not all on one line).
fn well_posed(points: &[ObsPoint]) -> bool {
    if points.len() < 3 {
        return false;
    }
    let n = points.len() as f64;
    let (mu, mv) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(u, v, _)| (a + u / n, b + v / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(u, v, _) in points {
        let (x, y) = (u - mu, v - mv);
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    let trace = sxx + syy;
    trace > 0.0 && (sxx * syy - sxy * sxy) > 1e-9 * trace * trace
}

/// Huber IRLS plane fit; `None` for fewer than three points or collinear
/// positions. The threshold follows the residual scale (1.4826 MAD) each
/// round.
pub fn fit_plane(points: &[ObsPoint], center: (f64, f64)) -> Option<Plane> {
    if !well_posed(points) {
        return None;
    }
    let mut weights = vec![1.0; points.len()];
    let mut y = solve(points, center, &weights)?;
    let mut abs_res = Vec::with_capacity(points.len());
    for _ in 0..IRLS_ROUNDS {
        abs_res.clear();
        abs_res.extend(
            points
                .iter()
                .map(|&(u, v, d)| (d - y.disparity((u, v), center)).abs()),
        );
        let mut scratch = abs_res.clone();
        let mad = median(&mut scratch).unwrap_or(0.0);
        let delta = (HUBER_C * 1.4826 * mad).max(MIN_DELTA);
        for (w, &r) in weights.iter_mut().zip(&abs_res) {
            *w = if r <= delta { 1.0 } else { delta / r };
        }
        y = solve(points, center, &weights)?;
    }
    Some(y)
}

/// Initial planes from per-segment observation lists. Segments without a
/// well-posed fit get a fronto-parallel plane at the median of their own
/// observations, else the median γ of neighbors resolved so far, else the
/// global median observation, else 0.
pub fn fit_planes_from_observations(
    observations: &[&[ObsPoint]],
    centers: &[(f64, f64)],
    neighbors: &[Vec<usize>],
) -> Vec<Plane> {
    let n = observations.len();
    let mut planes: Vec<Option<Plane>> = (0..n)
        .map(|i| {
            fit_plane(observations[i], centers[i]).or_else(|| {
                let mut d: Vec<f64> = observations[i].iter().map(|p| p.2).collect();
                median(&mut d).map(Plane::fronto_parallel)
            })
        })
        .collect();
    let resolved: Vec<Option<Plane>> = planes.clone();
    let mut all: Vec<f64> = observations
        .iter()
        .flat_map(|o| o.iter().map(|p| p.2))
        .collect();
    let global = median(&mut all).unwrap_or(0.0);
    for i in 0..n {
        if planes[i].is_none() {
            let mut g: Vec<f64> = neighbors[i]
                .iter()
                .filter_map(|&j| resolved[j].map(|y| y.gamma))
                .collect();
            planes[i] = Some(Plane::fronto_parallel(median(&mut g).unwrap_or(global)));
        }
    }
    planes
        .into_iter()
        .map(|y| y.expect("filled above"))
        .collect()
}

/// Robust local plane per segment from the observations that fall in it.
pub fn fit_initial_planes(segmentation: &Segmentation, obs: &DisparityImage) -> Vec<Plane> {
    let per_segment: Vec<Vec<ObsPoint>> = segmentation
        .segments
        .iter()
        .map(|s| {
            s.pixels
                .iter()
                .filter_map(|&(u, v)| obs.get(u, v).map(|d| (u as f64, v as f64, d as f64)))
                .collect()
        })
        .collect();
    let refs: Vec<&[ObsPoint]> = per_segment.iter().map(Vec::as_slice).collect();
    let centers: Vec<(f64, f64)> = segmentation.segments.iter().map(|s| s.center).collect();
    fit_planes_from_observations(&refs, &centers, &segmentation.neighbors())
}
