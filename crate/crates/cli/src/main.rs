//! Command-line front end: inference, evaluation, synthetic scenes, and the
//! benchmark studies.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use slanted_stereo::harness::{
    feasible_seeds, infer, oracle_fit, run_noise_study_with, run_scaling_study, write_noise_table,
    write_run_report, write_scaling_table, ErrorReport, NoiseStudyConfig, PipelineConfig,
    THRESHOLDS,
};
use slanted_stereo::imagery::{
    generate_synthetic, load_disparity, load_image, load_mask, save_disparity, save_scene,
    DisparityFormat, GroundTruth, SyntheticConfig,
};
use slanted_stereo::inference::write_trace;
use slanted_stereo::matching::MatchConfig;
use slanted_stereo::model::ModelParams;
use slanted_stereo::segmentation::{slic, SlicParams};

#[derive(Parser)]
#[command(
    name = "slanted-stereo",
    version,
    about = "Slanted-plane stereo with occlusion-boundary reasoning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a dense disparity map for a rectified pair.
    Infer(InferArgs),
    /// Score a disparity map against ground truth.
    Eval {
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Visibility mask; without it every pixel counts as non-occluded.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Write synthetic piecewise-planar scenes.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        n_scenes: usize,
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        /// First seed; seeds with an infeasible layout are skipped.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// RMS and boundary error as a function of observation noise.
    NoiseStudy {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0, 3.0, 5.0])]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 90)]
        n_test: usize,
        #[arg(long, default_value_t = 1000)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        /// Table destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runtime and error as a function of the superpixel count.
    ScalingStudy {
        /// Reference image; a synthetic scene is generated when omitted.
        #[arg(long, requires = "obs")]
        left: Option<PathBuf>,
        #[arg(long)]
        obs: Option<PathBuf>,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long, requires = "gt")]
        mask: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [100, 300, 600, 1200])]
        counts: Vec<usize>,
        /// Seed of the synthetic scene.
        #[arg(long, default_value_t = 1000)]
        scene_seed: u64,
        #[arg(long, default_value_t = 1.0)]
        noise_sigma: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the model to ground truth and score the result.
    Oracle {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        superpixels: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dense oracle disparity output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default model parameters as a configuration file.
    Params,
}

/// Segmentation and solver settings shared by the commands that run the
/// pipeline.
#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 100)]
    superpixels: usize,
    #[arg(long, default_value_t = 10)]
    particles: usize,
    #[arg(long, default_value_t = 5)]
    outer_iters: usize,
    /// Model parameter file (TOML); defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    solver_seed: u64,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    left: PathBuf,
    /// Right image; required unless `--obs` is given.
    #[arg(long, required_unless_present = "obs")]
    right: Option<PathBuf>,
    /// Precomputed sparse disparities used instead of matching.
    #[arg(long)]
    obs: Option<PathBuf>,
    /// Output disparity (`.pfm`, otherwise 16-bit PNG).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    superpixels: usize,
    #[arg(long, default_value_t = 10)]
    particles: usize,
    #[arg(long, default_value_t = 5)]
    outer_iters: usize,
    /// Model parameter file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-sweep bounds and per-iteration energies.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run summary destination; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    matching: MatchArgs,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long, default_value_t = MatchConfig::default().max_disparity)]
    max_disparity: usize,
    #[arg(long, default_value_t = MatchConfig::default().block_radius)]
    block_radius: usize,
    #[arg(long, default_value_t = MatchConfig::default().n_paths)]
    n_paths: usize,
    #[arg(long, default_value_t = MatchConfig::default().p1)]
    p1: u32,
    #[arg(long, default_value_t = MatchConfig::default().p2)]
    p2: u32,
    #[arg(long, default_value_t = MatchConfig::default().lr_threshold)]
    lr_threshold: f32,
    #[arg(long, default_value_t = MatchConfig::default().uniqueness)]
    uniqueness: f32,
    #[arg(long, default_value_t = MatchConfig::default().subpixel, action = clap::ArgAction::Set)]
    subpixel: bool,
}

impl MatchArgs {
    fn config(&self) -> MatchConfig {
        MatchConfig {
            max_disparity: self.max_disparity,
            block_radius: self.block_radius,
            n_paths: self.n_paths,
            p1: self.p1,
            p2: self.p2,
            lr_threshold: self.lr_threshold,
            uniqueness: self.uniqueness,
            subpixel: self.subpixel,
        }
    }
}

fn load_params(path: Option<&Path>) -> Result<ModelParams> {
    match path {
        Some(p) => ModelParams::load(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(ModelParams::default()),
    }
}

fn pipeline_config(
    superpixels: usize,
    particles: usize,
    outer_iters: usize,
    seed: u64,
    config: Option<&Path>,
) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig {
        slic: SlicParams::with_target(superpixels),
        model: load_params(config)?,
        ..Default::default()
    };
    cfg.pcbp.n_particles = particles;
    cfg.pcbp.n_outer_iters = outer_iters;
    cfg.pcbp.seed = seed;
    Ok(cfg)
}

impl SolverArgs {
    fn pipeline(&self) -> Result<PipelineConfig> {
        pipeline_config(
            self.superpixels,
            self.particles,
            self.outer_iters,
            self.solver_seed,
            self.config.as_deref(),
        )
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_gt(gt: &Path, mask: Option<&Path>) -> Result<GroundTruth> {
    let d = load_disparity(gt, DisparityFormat::from_path(gt))
        .with_context(|| format!("reading {}", gt.display()))?;
    Ok(match mask {
        Some(m) => {
            let (w, h, mask) = load_mask(m).with_context(|| format!("reading {}", m.display()))?;
            if (w, h) != (d.width(), d.height()) {
                bail!("mask is {w}x{h}, ground truth {}x{}", d.width(), d.height());
            }
            GroundTruth::new(d, mask)?
        }
        None => GroundTruth::without_mask(d),
    })
}

fn run_infer(a: &InferArgs) -> Result<()> {
    let mut cfg = pipeline_config(
        a.superpixels,
        a.particles,
        a.outer_iters,
        a.seed,
        a.config.as_deref(),
    )?;
    cfg.matching = a.matching.config();
    let left = load_image(&a.left).with_context(|| format!("reading {}", a.left.display()))?;
    let right = a
        .right
        .as_ref()
        .map(load_image)
        .transpose()
        .context("reading right image")?;
    let obs = a
        .obs
        .as_ref()
        .map(|p| load_disparity(p, DisparityFormat::from_path(p)))
        .transpose()
        .context("reading observations")?;
    let out = infer(&left, right.as_ref(), obs.as_ref(), &cfg)?;
    save_disparity(&out.disparity, &a.out, DisparityFormat::from_path(&a.out))
        .with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(t) = &a.trace {
        write_trace(&out.solution, &cfg.pcbp, output(Some(t))?)?;
    }
    let mut w = output(a.report.as_deref())?;
    write_run_report(&out, &cfg, &mut w)?;
    w.flush()?;
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Infer(a) => run_infer(&a)?,
        Command::Eval { est, gt, mask } => {
            let gt = load_gt(&gt, mask.as_deref())?;
            let est = load_disparity(&est, DisparityFormat::from_path(&est))
                .with_context(|| format!("reading {}", est.display()))?;
            let r = ErrorReport::compute(&est, &gt, &THRESHOLDS)?;
            println!("{}\n{}", r.csv_header(), r.csv_row());
        }
        Command::Synth {
            out_dir,
            n_scenes,
            noise_sigma,
            seed,
        } => {
            let seeds = feasible_seeds(&SyntheticConfig::default(), seed, n_scenes)?;
            for (s, seed) in seeds.into_iter().enumerate() {
                let cfg = SyntheticConfig {
                    noise_sigma,
                    seed,
                    ..Default::default()
                };
                let scene = generate_synthetic(&cfg)?;
                let dir = out_dir.join(format!("scene_{s:04}"));
                save_scene(&scene, &dir).with_context(|| format!("writing {}", dir.display()))?;
            }
        }
        Command::NoiseStudy {
            sigmas,
            n_test,
            seed,
            solver,
            out,
        } => {
            let cfg = NoiseStudyConfig {
                sigmas,
                n_test,
                seed,
                pipeline: solver.pipeline()?,
                ..Default::default()
            };
            let rows = run_noise_study_with(&cfg, |sigma, s| {
                eprintln!("sigma {sigma}: scene {}/{}", s + 1, cfg.n_test)
            })?;
            let mut w = output(out.as_deref())?;
            write_noise_table(&rows, &mut w)?;
            w.flush()?;
        }
        Command::ScalingStudy {
            left,
            obs,
            gt,
            mask,
            counts,
            scene_seed,
            noise_sigma,
            solver,
            out,
        } => {
            let cfg = solver.pipeline()?;
            let (left, obs, gt) = match (left, obs) {
                (Some(l), Some(o)) => (
                    load_image(&l).with_context(|| format!("reading {}", l.display()))?,
                    load_disparity(&o, DisparityFormat::from_path(&o))
                        .with_context(|| format!("reading {}", o.display()))?,
                    gt.as_deref()
                        .map(|g| load_gt(g, mask.as_deref()))
                        .transpose()?,
                ),
                (None, None) => {
                    let scene = generate_synthetic(&SyntheticConfig {
                        noise_sigma,
                        seed: scene_seed,
                        ..Default::default()
                    })?;
                    (scene.left, scene.sparse_observations, Some(scene.gt))
                }
                _ => bail!("--left and --obs go together"),
            };
            let rows = run_scaling_study(&left, &obs, gt.as_ref(), &counts, &cfg)?;
            let mut w = output(out.as_deref())?;
            write_scaling_table(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Oracle {
            gt,
            left,
            mask,
            superpixels,
            config,
            out,
        } => {
            let gt = load_gt(&gt, mask.as_deref())?;
            let left = load_image(&left).with_context(|| format!("reading {}", left.display()))?;
            let seg = slic(&left, &SlicParams::with_target(superpixels))?;
            let params = load_params(config.as_deref())?;
            let (planes, _, report) = oracle_fit(&gt, &seg, &params)?;
            if let Some(o) = out {
                let model =
                    slanted_stereo::model::StereoModel::new(seg, gt.disparity.clone(), params)?;
                save_disparity(
                    &model.dense_disparity(&planes),
                    &o,
                    DisparityFormat::from_path(&o),
                )?;
            }
            println!("{}\n{}", report.csv_header(), report.csv_row());
        }
        Command::Params => print!("{}", ModelParams::default().to_toml_string()),
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
