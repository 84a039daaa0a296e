use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::bp::{convex_bp, BpConfig, FactorGraph};
use super::fit::fit_planes_from_observations;
use super::InferenceError;
use crate::model::{combine_bdy1, BoundaryLabel, Plane, StereoModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcbpConfig {
    /// Particles per plane, including the incumbent.
    pub n_particles: usize,
    pub n_outer_iters: usize,
    pub sigma_alpha0: f64,
    pub sigma_beta0: f64,
    pub sigma_gamma0: f64,
    /// σ at outer iteration `t` is `σ0 · exp(-t / decay)`.
    pub decay: f64,
    pub bp_max_sweeps: usize,
    pub bp_tolerance: f64,
    pub seed: u64,
}

impl Default for PcbpConfig {
    fn default() -> Self {
        Self {
            n_particles: 10,
            n_outer_iters: 5,
            sigma_alpha0: 0.5,
            sigma_beta0: 0.5,
            sigma_gamma0: 5.0,
            decay: 10.0,
            bp_max_sweeps: 200,
            bp_tolerance: 1e-4,
            seed: 0,
        }
    }
}

impl PcbpConfig {
    pub fn validate(&self) -> Result<(), InferenceError> {
        let bad = |m: &str| Err(InferenceError::InvalidConfig(m.into()));
        if self.n_particles < 1 || self.n_outer_iters < 1 {
            return bad("n_particles and n_outer_iters must be >= 1");
        }
        let sig = [
            self.sigma_alpha0,
            self.sigma_beta0,
            self.sigma_gamma0,
            self.decay,
        ];
        if sig.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return bad("sigmas and decay must be finite and > 0");
        }
        if !(self.bp_tolerance >= 0.0) {
            return bad("bp_tolerance must be >= 0");
        }
        Ok(())
    }

    /// `(σ_α, σ_β, σ_γ)` at outer iteration `t` (1-based).
    pub fn sigmas(&self, t: usize) -> (f64, f64, f64) {
        let f = (-(t as f64) / self.decay).exp();
        (
            self.sigma_alpha0 * f,
            self.sigma_beta0 * f,
            self.sigma_gamma0 * f,
        )
    }

    fn bp(&self) -> BpConfig {
        BpConfig {
            max_sweeps: self.bp_max_sweeps,
            tolerance: self.bp_tolerance,
        }
    }
}

/// `n` particles: the current plane verbatim, then independent normal
/// perturbations of each coordinate.
pub fn sample_particles(
    current: &Plane,
    sigma: (f64, f64, f64),
    n: usize,
    rng: &mut impl Rng,
) -> Vec<Plane> {
    let mut out = Vec::with_capacity(n);
    out.push(*current);
    for _ in 1..n {
        let za: f64 = rng.sample(StandardNormal);
        let zb: f64 = rng.sample(StandardNormal);
        let zg: f64 = rng.sample(StandardNormal);
        out.push(Plane::new(
            current.alpha + sigma.0 * za,
            current.beta + sigma.1 * zb,
            current.gamma + sigma.2 * zg,
        ));
    }
    out
}

/// Discrete problem over particle indices and boundary labels. Variables
/// `0..n_segments` are planes, then one variable per pair.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub graph: FactorGraph,
    pub n_segments: usize,
    /// Index of the triplet factor `(o_k, y_i, y_j)` of every pair.
    pub pair_factors: Vec<usize>,
}

impl Discretized {
    pub fn label_var(&self, k: usize) -> usize {
        self.n_segments + k
    }
}

/// Builds the factor graph: plane unaries `w_seg φ_seg`, label unaries
/// `w_col φ_col`, per-pair tables `w_bdy1 φ_bdy1 + w_bdy2 φ_bdy2` over
/// `(o, a, b)`, and junction tables shared between junctions with the same
/// traversal flips.
pub fn discretize(
    model: &StereoModel,
    particles: &[Vec<Plane>],
) -> Result<Discretized, InferenceError> {
    let n_seg = model.n_segments();
    if particles.len() != n_seg || particles.iter().any(|p| p.is_empty()) {
        return Err(InferenceError::InvalidConfig(
            "one non-empty particle list per segment".into(),
        ));
    }
    let w = model.params().weights;
    let seg = model.segmentation();
    let mut g = FactorGraph::new();
    for (i, ps) in particles.iter().enumerate() {
        g.add_variable(ps.iter().map(|y| w.seg * model.seg_cost(i, y)).collect());
    }
    for k in 0..model.n_pairs() {
        g.add_variable(
            BoundaryLabel::ALL
                .iter()
                .map(|&o| w.col * model.color(k, o))
                .collect(),
        );
    }

    let mut pair_factors = Vec::with_capacity(model.n_pairs());
    for (k, p) in seg.pairs.iter().enumerate() {
        let (pi, pj) = (&particles[p.i], &particles[p.j]);
        let (ci, cj) = (model.center(p.i), model.center(p.j));
        let si: Vec<f64> = pi.iter().map(|y| model.band_cost(k, y, ci)).collect();
        let sj: Vec<f64> = pj.iter().map(|y| model.band_cost(k, y, cj)).collect();
        let mut table = Vec::with_capacity(4 * pi.len() * pj.len());
        for o in BoundaryLabel::ALL {
            for (a, ya) in pi.iter().enumerate() {
                for (b, yb) in pj.iter().enumerate() {
                    table.push(
                        w.bdy1 * combine_bdy1(o, si[a], sj[b]) + w.bdy2 * model.bdy2(k, o, ya, yb),
                    );
                }
            }
        }
        pair_factors.push(g.add_factor(vec![n_seg + k, p.i, p.j], Arc::new(table))?);
    }

    let mut cache3: HashMap<[bool; 3], Arc<Vec<f64>>> = HashMap::new();
    for (n, j) in seg.junctions3.iter().enumerate() {
        let table = cache3
            .entry(model.junction3_flips(n))
            .or_insert_with(|| {
                Arc::new(
                    (0..64)
                        .map(|x| {
                            let l = [x / 16, (x / 4) % 4, x % 4].map(BoundaryLabel::from_index);
                            w.jct3 * model.junction3_cost(n, l)
                        })
                        .collect(),
                )
            })
            .clone();
        g.add_factor(j.pairs.iter().map(|&k| n_seg + k).collect(), table)?;
    }
    let mut cache4: HashMap<[bool; 4], Arc<Vec<f64>>> = HashMap::new();
    for (n, j) in seg.junctions4.iter().enumerate() {
        let table = cache4
            .entry(model.junction4_flips(n))
            .or_insert_with(|| {
                Arc::new(
                    (0..256)
                        .map(|x| {
                            let l = [x / 64, (x / 16) % 4, (x / 4) % 4, x % 4]
                                .map(BoundaryLabel::from_index);
                            w.crs4 * model.junction4_cost(n, l)
                        })
                        .collect(),
                )
            })
            .clone();
        g.add_factor(j.pairs.iter().map(|&k| n_seg + k).collect(), table)?;
    }
    Ok(Discretized {
        graph: g,
        n_segments: n_seg,
        pair_factors,
    })
}

/// One outer iteration of the particle loop.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub t: usize,
    pub sigmas: (f64, f64, f64),
    /// Energy of the decoded candidate.
    pub candidate_energy: f64,
    /// Incumbent energy after the adoption decision.
    pub energy: f64,
    pub bound: f64,
    pub adopted: bool,
    /// Dual bound after every sweep.
    pub sweep_bounds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub planes: Vec<Plane>,
    pub labels: Vec<BoundaryLabel>,
    /// Continuous-model energy of `planes` and `labels`.
    pub energy: f64,
    /// Dual bound of the last discretized problem.
    pub bound: f64,
    pub initial_energy: f64,
    pub iterations: Vec<OuterRecord>,
}

impl Solution {
    /// Incumbent energy before the loop and after every outer iteration.
    pub fn energy_trace(&self) -> Vec<f64> {
        std::iter::once(self.initial_energy)
            .chain(self.iterations.iter().map(|r| r.energy))
            .collect()
    }
}

/// Local robust fit of every segment to the model's observations.
pub fn initial_planes(model: &StereoModel) -> Vec<Plane> {
    let obs: Vec<&[crate::model::ObsPoint]> = (0..model.n_segments())
        .map(|i| model.segment_observations(i))
        .collect();
    let centers: Vec<(f64, f64)> = (0..model.n_segments()).map(|i| model.center(i)).collect();
    fit_planes_from_observations(&obs, &centers, &model.segmentation().neighbors())
}

/// Particle convex BP starting from the local fit.
pub fn pcbp(model: &StereoModel, cfg: &PcbpConfig) -> Result<Solution, InferenceError> {
    pcbp_from(model, cfg, initial_planes(model))
}

/// Particle convex BP from given planes. The incumbent is always particle 0
/// and a candidate replaces it only if its energy is not higher, so the
/// incumbent energy never increases.
pub fn pcbp_from(
    model: &StereoModel,
    cfg: &PcbpConfig,
    planes: Vec<Plane>,
) -> Result<Solution, InferenceError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut planes = planes;
    let mut labels = model.best_pair_labels(&planes);
    let mut energy = model.total_energy(&planes, &labels)?;
    let initial_energy = energy;
    let mut bound = f64::NEG_INFINITY;
    let mut iterations = Vec::with_capacity(cfg.n_outer_iters);

    for t in 1..=cfg.n_outer_iters {
        let sigmas = cfg.sigmas(t);
        let particles: Vec<Vec<Plane>> = planes
            .iter()
            .map(|y| sample_particles(y, sigmas, cfg.n_particles, &mut rng))
            .collect();
        let d = discretize(model, &particles)?;
        let r = convex_bp(&d.graph, &cfg.bp())?;
        let cand_planes: Vec<Plane> = (0..d.n_segments)
            .map(|i| particles[i][r.assignment[i]])
            .collect();
        let cand_labels: Vec<BoundaryLabel> = (0..model.n_pairs())
            .map(|k| BoundaryLabel::from_index(r.assignment[d.label_var(k)]))
            .collect();
        let cand_energy = model.total_energy(&cand_planes, &cand_labels)?;
        let adopted = cand_energy <= energy;
        if adopted {
            planes = cand_planes;
            labels = cand_labels;
            energy = cand_energy;
        }
        bound = r.bound;
        iterations.push(OuterRecord {
            t,
            sigmas,
            candidate_energy: cand_energy,
            energy,
            bound: r.bound,
            adopted,
            sweep_bounds: r.bounds,
        });
    }
    Ok(Solution {
        planes,
        labels,
        energy,
        bound,
        initial_energy,
        iterations,
    })
}

/// Line-oriented solver trace: a header echoing the configuration, then
/// `sweep t s bound` and `outer t energy candidate bound adopted` records.
pub fn write_trace(
    solution: &Solution,
    cfg: &PcbpConfig,
    mut out: impl Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "# seed {} particles {} outer_iters {} sigma0 {} {} {} decay {} bp_max_sweeps {} bp_tolerance {}",
        cfg.seed,
        cfg.n_particles,
        cfg.n_outer_iters,
        cfg.sigma_alpha0,
        cfg.sigma_beta0,
        cfg.sigma_gamma0,
        cfg.decay,
        cfg.bp_max_sweeps,
        cfg.bp_tolerance
    )?;
    writeln!(out, "init 0 {}", solution.initial_energy)?;
    for r in &solution.iterations {
        for (s, b) in r.sweep_bounds.iter().enumerate() {
            writeln!(out, "sweep {} {} {}", r.t, s + 1, b)?;
        }
        writeln!(
            out,
            "outer {} {} {} {} {}",
            r.t,
            r.energy,
            r.candidate_energy,
            r.bound,
            u8::from(r.adopted)
        )?;
    }
    Ok(())
}
