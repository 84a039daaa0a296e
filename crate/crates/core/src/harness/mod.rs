//! Evaluation: error metrics, the end-to-end pipeline, ground-truth
//! references for synthetic scenes, and the noise and scaling studies.

mod metrics;
mod pipeline;
mod scenes;
mod studies;

use thiserror::Error;

pub use metrics::{boundary_error, error_rate, rms, ErrorReport, Scope, THRESHOLDS};
pub use pipeline::{infer, run_pipeline, write_run_report, PipelineConfig, PipelineOutput};
pub use scenes::{gt_labels, gt_segment_planes, oracle_fit, segment_regions, HINGE_TOLERANCE};
pub use studies::{
    feasible_seeds, linear_fit_r2, run_noise_study, run_noise_study_with, run_scaling_study,
    write_noise_table, write_scaling_table, NoiseRow, NoiseStudyConfig, ScalingRow,
};

use crate::imagery::ImageError;
use crate::inference::InferenceError;
use crate::matching::MatchError;
use crate::model::ModelError;
use crate::segmentation::SegmentationError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no ground-truth pixels in scope")]
    EmptyDenominator,
    #[error("{0} labels against {1} reference labels")]
    PairMismatch(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("invalid study: {0}")]
    InvalidStudy(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}
