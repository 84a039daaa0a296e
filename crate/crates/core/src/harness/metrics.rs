use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::imagery::{DisparityImage, GroundTruth, Visibility};
use crate::model::BoundaryLabel;

/// Default error thresholds, pixels.
pub const THRESHOLDS: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    /// Pixels marked non-occluded.
    NonOccluded,
    /// Every pixel with a ground-truth disparity.
    All,
}

impl Scope {
    fn contains(self, m: Visibility) -> bool {
        match self {
            Scope::NonOccluded => m == Visibility::NonOccluded,
            Scope::All => true,
        }
    }
}

fn check_dims(est: &DisparityImage, gt: &DisparityImage) -> Result<(), HarnessError> {
    if (est.width(), est.height()) != (gt.width(), gt.height()) {
        return Err(HarnessError::DimensionMismatch(format!(
            "estimate {}x{}, ground truth {}x{}",
            est.width(),
            est.height(),
            gt.width(),
            gt.height()
        )));
    }
    Ok(())
}

/// Percentage of in-scope ground-truth pixels whose estimate is off by more
/// than `threshold`. A missing estimate counts as an error.
pub fn error_rate(
    est: &DisparityImage,
    gt: &GroundTruth,
    threshold: f64,
    scope: Scope,
) -> Result<f64, HarnessError> {
    check_dims(est, &gt.disparity)?;
    let (mut bad, mut total) = (0usize, 0usize);
    for (i, (g, e)) in gt.disparity.values().iter().zip(est.values()).enumerate() {
        let Some(g) = g else { continue };
        if !scope.contains(gt.mask[i]) {
            continue;
        }
        total += 1;
        if e.is_none_or(|e| (e as f64 - *g as f64).abs() > threshold) {
            bad += 1;
        }
    }
    if total == 0 {
        return Err(HarnessError::EmptyDenominator);
    }
    Ok(100.0 * bad as f64 / total as f64)
}

/// Root mean squared error over valid ground-truth pixels that have an
/// estimate.
pub fn rms(est: &DisparityImage, gt: &DisparityImage) -> Result<f64, HarnessError> {
    check_dims(est, gt)?;
    let (mut acc, mut n) = (0.0, 0usize);
    for (g, e) in gt.values().iter().zip(est.values()) {
        if let (Some(g), Some(e)) = (g, e) {
            let d = *e as f64 - *g as f64;
            acc += d * d;
            n += 1;
        }
    }
    if n == 0 {
        return Err(HarnessError::EmptyDenominator);
    }
    Ok((acc / n as f64).sqrt())
}

/// Percentage of pairs whose label differs from the reference.
pub fn boundary_error(
    labels: &[BoundaryLabel],
    gt_labels: &[BoundaryLabel],
) -> Result<f64, HarnessError> {
    if labels.len() != gt_labels.len() {
        return Err(HarnessError::PairMismatch(labels.len(), gt_labels.len()));
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let wrong = labels.iter().zip(gt_labels).filter(|(a, b)| a != b).count();
    Ok(100.0 * wrong as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub thresholds: Vec<f64>,
    /// Percent of non-occluded pixels above each threshold.
    pub non_occluded: Vec<f64>,
    /// Percent of all ground-truth pixels above each threshold.
    pub all: Vec<f64>,
    pub rms: f64,
    /// Synthetic scenes only.
    pub boundary_error: Option<f64>,
    pub runtime_seconds: f64,
}

impl ErrorReport {
    pub fn compute(
        est: &DisparityImage,
        gt: &GroundTruth,
        thresholds: &[f64],
    ) -> Result<Self, HarnessError> {
        let mut non_occluded = Vec::with_capacity(thresholds.len());
        let mut all = Vec::with_capacity(thresholds.len());
        for &t in thresholds {
            // a map without non-occluded pixels still gets an all-pixel score
            non_occluded.push(match error_rate(est, gt, t, Scope::NonOccluded) {
                Err(HarnessError::EmptyDenominator) => f64::NAN,
                r => r?,
            });
            all.push(error_rate(est, gt, t, Scope::All)?);
        }
        Ok(Self {
            thresholds: thresholds.to_vec(),
            non_occluded,
            all,
            rms: rms(est, &gt.disparity)?,
            boundary_error: None,
            runtime_seconds: 0.0,
        })
    }

    /// Error at a threshold, or `None` if it was not evaluated.
    pub fn at(&self, threshold: f64, scope: Scope) -> Option<f64> {
        let k = self.thresholds.iter().position(|&t| t == threshold)?;
        Some(match scope {
            Scope::NonOccluded => self.non_occluded[k],
            Scope::All => self.all[k],
        })
    }

    pub fn csv_header(&self) -> String {
        let mut cols: Vec<String> = Vec::new();
        for t in &self.thresholds {
            cols.push(format!("noc_{t}px"));
        }
        for t in &self.thresholds {
            cols.push(format!("all_{t}px"));
        }
        cols.extend([
            "rms".into(),
            "boundary_error".into(),
            "runtime_seconds".into(),
        ]);
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols: Vec<String> = self
            .non_occluded
            .iter()
            .chain(&self.all)
            .map(|x| format!("{x:.4}"))
            .collect();
        cols.push(format!("{:.4}", self.rms));
        cols.push(
            self.boundary_error
                .map_or_else(String::new, |b| format!("{b:.4}")),
        );
        cols.push(format!("{:.4}", self.runtime_seconds));
        cols.join(",")
    }
}
