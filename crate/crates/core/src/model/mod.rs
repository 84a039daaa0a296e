//! The hybrid energy: one slanted plane per segment, one boundary label per
//! neighbor pair, and the potentials tying them to the observations and to
//! each other.

pub mod junction;
mod params;
mod plane;
mod potentials;

use thiserror::Error;

pub use junction::{phi_junction3, phi_junction4, JunctionLabel};
pub use params::{ModelParams, Weights};
pub use plane::{plane_disparity, truncated_quadratic, Plane};
pub use potentials::{
    color_cost, combine_bdy1, convex_hull, mean_squared_difference, phi_bdy1, phi_bdy2, phi_color,
    phi_neg, phi_occ, phi_seg, BoundaryLabel, Moments, ObsPoint, PairGeometry,
};

use crate::imagery::DisparityImage;
use crate::segmentation::Segmentation;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cannot parse parameter file: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("incomplete assignment: {0}")]
    IncompleteAssignment(String),
}

/// Segmentation, observations and parameters, with everything the
/// potentials need precomputed per segment and per pair.
#[derive(Debug, Clone)]
pub struct StereoModel {
    segmentation: Segmentation,
    observations: DisparityImage,
    params: ModelParams,
    seg_obs: Vec<Vec<ObsPoint>>,
    band_obs: Vec<Vec<ObsPoint>>,
    geometry: Vec<PairGeometry>,
    chi2: Vec<f64>,
    flips3: Vec<[bool; 3]>,
    flips4: Vec<[bool; 4]>,
}

impl StereoModel {
    pub fn new(
        segmentation: Segmentation,
        observations: DisparityImage,
        params: ModelParams,
    ) -> Result<Self, ModelError> {
        params.validate()?;
        if (observations.width(), observations.height())
            != (segmentation.width(), segmentation.height())
        {
            return Err(ModelError::DimensionMismatch(format!(
                "observations are {}x{}, segmentation {}x{}",
                observations.width(),
                observations.height(),
                segmentation.width(),
                segmentation.height()
            )));
        }
        let gather = |pixels: &[(usize, usize)]| -> Vec<ObsPoint> {
            pixels
                .iter()
                .filter_map(|&(u, v)| {
                    observations
                        .get(u, v)
                        .map(|d| (u as f64, v as f64, d as f64))
                })
                .collect()
        };
        let seg_obs = segmentation
            .segments
            .iter()
            .map(|s| gather(&s.pixels))
            .collect();
        let band_obs = segmentation.pairs.iter().map(|p| gather(&p.band)).collect();
        let seg_moments: Vec<Moments> = segmentation
            .segments
            .iter()
            .map(|s| Moments::from_pixels(&s.pixels))
            .collect();
        let geometry = segmentation
            .pairs
            .iter()
            .map(|p| PairGeometry {
                hull: convex_hull(&p.band),
                band: Moments::from_pixels(&p.band),
                union: seg_moments[p.i].merge(&seg_moments[p.j]),
            })
            .collect();
        let chi2 = segmentation
            .pairs
            .iter()
            .map(|p| {
                let s = &segmentation.segments;
                s[p.i].histogram.chi_squared(&s[p.j].histogram)
            })
            .collect();
        let flip = |seg: usize, pair: usize| segmentation.pairs[pair].i != seg;
        let flips3 = segmentation
            .junctions3
            .iter()
            .map(|j| std::array::from_fn(|k| flip(j.segments[k], j.pairs[k])))
            .collect();
        let flips4 = segmentation
            .junctions4
            .iter()
            .map(|j| std::array::from_fn(|k| flip(j.segments[k], j.pairs[k])))
            .collect();
        Ok(Self {
            segmentation,
            observations,
            params,
            seg_obs,
            band_obs,
            geometry,
            chi2,
            flips3,
            flips4,
        })
    }

    pub fn segmentation(&self) -> &Segmentation {
        &self.segmentation
    }

    pub fn observations(&self) -> &DisparityImage {
        &self.observations
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_segments(&self) -> usize {
        self.segmentation.segments.len()
    }

    pub fn n_pairs(&self) -> usize {
        self.segmentation.pairs.len()
    }

    #[inline]
    pub fn center(&self, i: usize) -> (f64, f64) {
        self.segmentation.segments[i].center
    }

    /// Observations inside segment `i`.
    pub fn segment_observations(&self, i: usize) -> &[ObsPoint] {
        &self.seg_obs[i]
    }

    /// Observations inside the band of pair `k`.
    pub fn band_observations(&self, k: usize) -> &[ObsPoint] {
        &self.band_obs[k]
    }

    pub fn geometry(&self, k: usize) -> &PairGeometry {
        &self.geometry[k]
    }

    pub fn chi2(&self, k: usize) -> f64 {
        self.chi2[k]
    }

    /// Whether boundary `m` of 3-way junction `n` is traversed from `j` to `i`.
    pub fn junction3_flips(&self, n: usize) -> [bool; 3] {
        self.flips3[n]
    }

    pub fn junction4_flips(&self, n: usize) -> [bool; 4] {
        self.flips4[n]
    }

    pub fn seg_cost(&self, i: usize, y: &Plane) -> f64 {
        phi_seg(y, self.center(i), &self.seg_obs[i], self.params.k)
    }

    /// Band data cost of a plane of either side of pair `k`.
    pub fn band_cost(&self, k: usize, y: &Plane, side_center: (f64, f64)) -> f64 {
        phi_seg(y, side_center, &self.band_obs[k], self.params.k)
    }

    pub fn bdy1(&self, k: usize, o: BoundaryLabel, y_i: &Plane, y_j: &Plane) -> f64 {
        let p = &self.segmentation.pairs[k];
        phi_bdy1(
            o,
            (y_i, self.center(p.i)),
            (y_j, self.center(p.j)),
            &self.band_obs[k],
            self.params.k,
        )
    }

    pub fn bdy2(&self, k: usize, o: BoundaryLabel, y_i: &Plane, y_j: &Plane) -> f64 {
        let p = &self.segmentation.pairs[k];
        phi_bdy2(
            o,
            (y_i, self.center(p.i)),
            (y_j, self.center(p.j)),
            &self.geometry[k],
            &self.params,
        )
    }

    pub fn color(&self, k: usize, o: BoundaryLabel) -> f64 {
        color_cost(o, self.chi2[k], &self.params)
    }

    /// `w_bdy1 φ_bdy1 + w_bdy2 φ_bdy2 + w_col φ_col` of pair `k`.
    pub fn pair_cost(&self, k: usize, o: BoundaryLabel, y_i: &Plane, y_j: &Plane) -> f64 {
        let w = &self.params.weights;
        w.bdy1 * self.bdy1(k, o, y_i, y_j)
            + w.bdy2 * self.bdy2(k, o, y_i, y_j)
            + w.col * self.color(k, o)
    }

    /// Unweighted 3-way junction potential; `labels` are the stored labels of
    /// the junction's pairs in traversal order.
    pub fn junction3_cost(&self, n: usize, labels: [BoundaryLabel; 3]) -> f64 {
        let f = self.flips3[n];
        phi_junction3(
            std::array::from_fn(|k| JunctionLabel::from_pair(labels[k], f[k])),
            self.params.lambda_imp,
        )
    }

    pub fn junction4_cost(&self, n: usize, labels: [BoundaryLabel; 4]) -> f64 {
        let f = self.flips4[n];
        phi_junction4(
            std::array::from_fn(|k| JunctionLabel::from_pair(labels[k], f[k])),
            self.params.lambda_imp,
        )
    }

    /// Energy of a complete assignment:
    /// `w_seg Σ φ_seg + Σ_pairs (w_bdy1 φ_bdy1 + w_bdy2 φ_bdy2 + w_col φ_col)
    ///  + w_jct3 Σ φ_jct3 + w_crs4 Σ φ_crs4`.
    pub fn total_energy(
        &self,
        planes: &[Plane],
        labels: &[BoundaryLabel],
    ) -> Result<f64, ModelError> {
        if planes.len() != self.n_segments() || labels.len() != self.n_pairs() {
            return Err(ModelError::IncompleteAssignment(format!(
                "{} planes for {} segments, {} labels for {} pairs",
                planes.len(),
                self.n_segments(),
                labels.len(),
                self.n_pairs()
            )));
        }
        let w = &self.params.weights;
        let mut seg = 0.0;
        for (i, y) in planes.iter().enumerate() {
            seg += self.seg_cost(i, y);
        }
        let mut e = w.seg * seg;
        for (k, p) in self.segmentation.pairs.iter().enumerate() {
            e += self.pair_cost(k, labels[k], &planes[p.i], &planes[p.j]);
        }
        let mut j3 = 0.0;
        for (n, j) in self.segmentation.junctions3.iter().enumerate() {
            j3 += self.junction3_cost(n, j.pairs.map(|k| labels[k]));
        }
        e += w.jct3 * j3;
        let mut j4 = 0.0;
        for (n, j) in self.segmentation.junctions4.iter().enumerate() {
            j4 += self.junction4_cost(n, j.pairs.map(|k| labels[k]));
        }
        e += w.crs4 * j4;
        Ok(e)
    }

    /// Per-pair label minimizing `pair_cost` for fixed planes (ties to the
    /// lowest label index).
    pub fn best_pair_labels(&self, planes: &[Plane]) -> Vec<BoundaryLabel> {
        self.segmentation
            .pairs
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let mut best = (f64::INFINITY, BoundaryLabel::Co);
                for o in BoundaryLabel::ALL {
                    let c = self.pair_cost(k, o, &planes[p.i], &planes[p.j]);
                    if c < best.0 {
                        best = (c, o);
                    }
                }
                best.1
            })
            .collect()
    }

    /// Dense disparity map: every pixel evaluates its segment's plane,
    /// clamped at 0.
    pub fn dense_disparity(&self, planes: &[Plane]) -> DisparityImage {
        let (w, h) = (self.segmentation.width(), self.segmentation.height());
        let mut out = DisparityImage::new_invalid(w, h);
        for (i, s) in self.segmentation.segments.iter().enumerate() {
            let c = s.center;
            for &(u, v) in &s.pixels {
                let d = planes[i].disparity((u as f64, v as f64), c).max(0.0);
                out.set(u, v, Some(d as f32));
            }
        }
        out
    }
}
