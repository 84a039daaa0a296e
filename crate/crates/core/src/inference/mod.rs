//! MAP inference: convergent message passing on discrete factor graphs,
//! robust initial plane fitting, and the particle loop that discretizes the
//! continuous plane variables around the incumbent.

mod bp;
mod fit;
mod pcbp;

use thiserror::Error;

pub use bp::{convex_bp, BpConfig, BpResult, Factor, FactorGraph};
pub use fit::{fit_initial_planes, fit_plane, fit_planes_from_observations};
pub use pcbp::{
    discretize, initial_planes, pcbp, pcbp_from, sample_particles, write_trace, Discretized,
    OuterRecord, PcbpConfig, Solution,
};

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("non-finite cost in {0}")]
    NonFinite(String),
    #[error("invalid factor: {0}")]
    InvalidFactor(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
