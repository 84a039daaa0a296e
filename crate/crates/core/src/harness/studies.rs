use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    boundary_error, gt_labels, rms, run_pipeline, ErrorReport, HarnessError, PipelineConfig, Scope,
    THRESHOLDS,
};
use crate::imagery::{
    generate_synthetic, DisparityImage, GroundTruth, Image, ImageError, SyntheticConfig,
};
use crate::segmentation::SlicParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseStudyConfig {
    pub sigmas: Vec<f64>,
    /// Training-split size. Weights are fixed configuration, so these scenes
    /// are not generated.
    pub n_train_like: usize,
    pub n_test: usize,
    /// Scene template; `seed` and `noise_sigma` are set per scene.
    pub scene: SyntheticConfig,
    pub pipeline: PipelineConfig,
    /// Scenes use the first `n_test` seeds from `seed` upward whose layout
    /// is feasible, the same at every σ, so rows share geometry.
    pub seed: u64,
}

impl Default for NoiseStudyConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 1.0, 2.0, 3.0, 5.0],
            n_train_like: 10,
            n_test: 90,
            scene: SyntheticConfig::default(),
            pipeline: PipelineConfig::default(),
            seed: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub sigma: f64,
    pub n_scenes: usize,
    /// Mean over scenes of the dense RMS error, pixels.
    pub rms: f64,
    /// Mean over scenes of the boundary-label error, percent.
    pub boundary_error: f64,
    /// Mean non-occluded error above 3 px, percent.
    pub error_3px: f64,
    pub mean_runtime_seconds: f64,
}

pub fn run_noise_study(cfg: &NoiseStudyConfig) -> Result<Vec<NoiseRow>, HarnessError> {
    run_noise_study_with(cfg, |_, _| {})
}

/// As [`run_noise_study`], calling `progress(sigma, scene)` after each scene.
pub fn run_noise_study_with(
    cfg: &NoiseStudyConfig,
    mut progress: impl FnMut(f64, usize),
) -> Result<Vec<NoiseRow>, HarnessError> {
    let seeds = feasible_seeds(&cfg.scene, cfg.seed, cfg.n_test)?;
    let mut rows = Vec::with_capacity(cfg.sigmas.len());
    for &sigma in &cfg.sigmas {
        let (mut r, mut b, mut e3, mut t) = (0.0, 0.0, 0.0, 0.0);
        for (s, &seed) in seeds.iter().enumerate() {
            let scene_cfg = SyntheticConfig {
                noise_sigma: sigma,
                seed,
                ..cfg.scene.clone()
            };
            let scene = generate_synthetic(&scene_cfg)?;
            let out = run_pipeline(&scene.left, &scene.sparse_observations, &cfg.pipeline)?;
            let labels = gt_labels(&scene, out.model.segmentation());
            r += rms(&out.disparity, &scene.gt.disparity)?;
            b += boundary_error(&out.solution.labels, &labels)?;
            e3 += super::error_rate(&out.disparity, &scene.gt, 3.0, Scope::NonOccluded)?;
            t += out.runtime_seconds;
            progress(sigma, s);
        }
        let n = cfg.n_test.max(1) as f64;
        rows.push(NoiseRow {
            sigma,
            n_scenes: cfg.n_test,
            rms: r / n,
            boundary_error: b / n,
            error_3px: e3 / n,
            mean_runtime_seconds: t / n,
        });
    }
    Ok(rows)
}

/// The first `n` seeds from `first` upward whose region layout satisfies
/// the generator. The layout is drawn before any noise, so feasibility does
/// not depend on σ.
pub fn feasible_seeds(
    template: &SyntheticConfig,
    first: u64,
    n: usize,
) -> Result<Vec<u64>, HarnessError> {
    let mut seeds = Vec::with_capacity(n);
    let budget = 10 * n as u64 + 10;
    for seed in first..first + budget {
        if seeds.len() == n {
            break;
        }
        let probe = SyntheticConfig {
            noise_sigma: 0.0,
            seed,
            ..template.clone()
        };
        match generate_synthetic(&probe) {
            Ok(_) => seeds.push(seed),
            Err(ImageError::InfeasibleConfig(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if seeds.len() < n {
        return Err(HarnessError::InvalidStudy(format!(
            "only {} feasible scenes among seeds {first}..{}",
            seeds.len(),
            first + budget
        )));
    }
    Ok(seeds)
}

pub fn write_noise_table(rows: &[NoiseRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "sigma,n_scenes,rms,boundary_error,error_3px,mean_runtime_seconds"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.4},{:.4},{:.4},{:.4}",
            r.sigma, r.n_scenes, r.rms, r.boundary_error, r.error_3px, r.mean_runtime_seconds
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub requested: usize,
    pub segments: usize,
    pub runtime_seconds: f64,
    /// Present when ground truth was supplied.
    pub report: Option<ErrorReport>,
}

/// Runs the pipeline once per superpixel count (ascending) on one image.
pub fn run_scaling_study(
    left: &Image,
    obs: &DisparityImage,
    gt: Option<&GroundTruth>,
    counts: &[usize],
    cfg: &PipelineConfig,
) -> Result<Vec<ScalingRow>, HarnessError> {
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::InvalidStudy(
            "superpixel counts must be strictly ascending".into(),
        ));
    }
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        let run_cfg = PipelineConfig {
            slic: SlicParams {
                n_target: n,
                ..cfg.slic
            },
            ..*cfg
        };
        let out = run_pipeline(left, obs, &run_cfg)?;
        let report = gt
            .map(|g| -> Result<ErrorReport, HarnessError> {
                let mut r = ErrorReport::compute(&out.disparity, g, &THRESHOLDS)?;
                r.runtime_seconds = out.runtime_seconds;
                Ok(r)
            })
            .transpose()?;
        rows.push(ScalingRow {
            requested: n,
            segments: out.model.n_segments(),
            runtime_seconds: out.runtime_seconds,
            report,
        });
    }
    Ok(rows)
}

/// One row per count; with ground truth the report columns (which include
/// the runtime) follow the segment count.
pub fn write_scaling_table(rows: &[ScalingRow], mut out: impl Write) -> std::io::Result<()> {
    let header = rows
        .iter()
        .find_map(|r| r.report.as_ref())
        .map(|r| r.csv_header());
    match &header {
        Some(h) => writeln!(out, "requested,segments,{h}")?,
        None => writeln!(out, "requested,segments,runtime_seconds")?,
    }
    for r in rows {
        match &r.report {
            Some(rep) => writeln!(out, "{},{},{}", r.requested, r.segments, rep.csv_row())?,
            None => writeln!(
                out,
                "{},{},{:.4}",
                r.requested, r.segments, r.runtime_seconds
            )?,
        }
    }
    Ok(())
}

/// Coefficient of determination of the least-squares line through the points.
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return if syy == 0.0 { 1.0 } else { 0.0 };
    }
    sxy * sxy / (sxx * syy)
}
