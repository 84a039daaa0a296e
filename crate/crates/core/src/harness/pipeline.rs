use std::io::{self, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::imagery::{DisparityImage, Image};
use crate::inference::{initial_planes, pcbp_from, PcbpConfig, Solution};
use crate::matching::{match_stereo, passthrough, MatchConfig};
use crate::model::{BoundaryLabel, ModelParams, Plane, StereoModel};
use crate::segmentation::{slic, SlicParams};

/// Everything the end-to-end pipeline needs besides its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub slic: SlicParams,
    pub model: ModelParams,
    pub pcbp: PcbpConfig,
    pub matching: MatchConfig,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub model: StereoModel,
    pub initial_planes: Vec<Plane>,
    pub solution: Solution,
    /// Dense map from the final planes.
    pub disparity: DisparityImage,
    /// Dense map from the initial local fit.
    pub initial_disparity: DisparityImage,
    pub runtime_seconds: f64,
}

/// Segments `left`, builds the model over `obs`, and runs the particle
/// solver. The runtime covers segmentation and inference.
pub fn run_pipeline(
    left: &Image,
    obs: &DisparityImage,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput, HarnessError> {
    let start = Instant::now();
    let segmentation = slic(left, &cfg.slic)?;
    let model = StereoModel::new(segmentation, passthrough(obs), cfg.model)?;
    let init = initial_planes(&model);
    let solution = pcbp_from(&model, &cfg.pcbp, init.clone())?;
    let runtime_seconds = start.elapsed().as_secs_f64();
    let disparity = model.dense_disparity(&solution.planes);
    let initial_disparity = model.dense_disparity(&init);
    Ok(PipelineOutput {
        model,
        initial_planes: init,
        solution,
        disparity,
        initial_disparity,
        runtime_seconds,
    })
}

/// Stereo entry point: `obs` when given, else disparities matched from
/// `left` and `right`.
pub fn infer(
    left: &Image,
    right: Option<&Image>,
    obs: Option<&DisparityImage>,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput, HarnessError> {
    let matched;
    let obs = match (obs, right) {
        (Some(o), _) => o,
        (None, Some(r)) => {
            matched = match_stereo(left, r, &cfg.matching)?;
            &matched
        }
        (None, None) => {
            return Err(HarnessError::MissingInput(
                "need a right image or observations".into(),
            ))
        }
    };
    run_pipeline(left, obs, cfg)
}

/// Run summary without timings, so identical runs give identical text.
pub fn write_run_report(
    out: &PipelineOutput,
    cfg: &PipelineConfig,
    mut w: impl Write,
) -> io::Result<()> {
    let s = &out.solution;
    writeln!(w, "seed = {}", cfg.pcbp.seed)?;
    writeln!(w, "superpixels = {}", out.model.n_segments())?;
    writeln!(w, "pairs = {}", out.model.n_pairs())?;
    writeln!(w, "particles = {}", cfg.pcbp.n_particles)?;
    writeln!(w, "outer_iters = {}", cfg.pcbp.n_outer_iters)?;
    writeln!(w, "initial_energy = {:.6}", s.initial_energy)?;
    writeln!(w, "energy = {:.6}", s.energy)?;
    writeln!(w, "bound = {:.6}", s.bound)?;
    for o in BoundaryLabel::ALL {
        let n = s.labels.iter().filter(|&&l| l == o).count();
        writeln!(w, "labels.{o} = {n}")?;
    }
    for r in &s.iterations {
        writeln!(
            w,
            "iteration.{} = {:.6} adopted={}",
            r.t, r.energy, r.adopted
        )?;
    }
    Ok(())
}
