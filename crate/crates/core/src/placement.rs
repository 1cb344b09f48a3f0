//! Camera placement by simulated annealing over node positions and bearings.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::objective::{score_cameras, ObjectiveConfig, SolverMode};
use crate::scene::{normalize_angle, Camera, ObstacleMap, Scene};
use crate::Vec2;

const PROPOSAL_STREAM: u64 = 0;
const ACCEPTANCE_STREAM: u64 = 1;
const MAX_PROPOSAL_TRIES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Proposal {
    /// Resample one uniformly chosen camera.
    Reset,
    /// Gaussian step on one camera, snapped back to the node and bearing sets.
    Perturb { sigma_pos: f64, sigma_angle: f64 },
    /// Resample every camera.
    FullReset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSampling {
    Continuous,
    /// Bearings restricted to `2 pi k / m`.
    Discrete(usize),
}

/// Where cameras may go and what they look like.
#[derive(Clone, Debug)]
pub struct SearchSpace {
    pub obstacles: ObstacleMap,
    pub opening: f64,
    pub falloff: f64,
    pub angles: AngleSampling,
    /// Also search the opening angle instead of keeping `opening` fixed.
    pub search_opening: bool,
    free: Vec<usize>,
}

impl SearchSpace {
    pub fn new(obstacles: ObstacleMap, opening: f64, angles: AngleSampling) -> Result<Self> {
        if !(opening > 0.0 && opening <= TAU) {
            return Err(Error::config(format!("opening angle must be in (0, 2pi], got {opening}")));
        }
        if angles == AngleSampling::Discrete(0) {
            return Err(Error::config("discrete bearings need at least one direction"));
        }
        let free = obstacles.free_nodes();
        Ok(Self { obstacles, opening, falloff: Camera::DEFAULT_FALLOFF, angles, search_opening: false, free })
    }

    pub fn with_falloff(mut self, falloff: f64) -> Self {
        self.falloff = falloff;
        self
    }

    pub fn with_opening_search(mut self) -> Self {
        self.search_opening = true;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.obstacles.grid
    }

    /// Candidate camera nodes.
    pub fn nodes(&self) -> &[usize] {
        &self.free
    }

    /// All admissible bearings in discrete mode; empty when continuous.
    pub fn bearings(&self) -> Vec<f64> {
        match self.angles {
            AngleSampling::Continuous => Vec::new(),
            AngleSampling::Discrete(m) => (0..m).map(|k| TAU * k as f64 / m as f64).collect(),
        }
    }

    pub fn camera(&self, node: usize, beta: f64) -> Camera {
        self.camera_with_opening(node, beta, self.opening)
    }

    fn camera_with_opening(&self, node: usize, beta: f64, alpha: f64) -> Camera {
        Camera::with_falloff(self.grid().position(node), beta, alpha, self.falloff)
            .expect("search space parameters were validated")
    }

    fn random_opening(&self, rng: &mut impl Rng) -> f64 {
        if self.search_opening {
            // (0, 2pi]
            TAU - rng.random_range(0.0..TAU)
        } else {
            self.opening
        }
    }

    fn snap_angle(&self, beta: f64) -> f64 {
        match self.angles {
            AngleSampling::Continuous => normalize_angle(beta),
            AngleSampling::Discrete(m) => {
                let step = TAU / m as f64;
                let k = (normalize_angle(beta) / step).round() as usize % m;
                TAU * k as f64 / m as f64
            }
        }
    }

    fn random_angle(&self, rng: &mut impl Rng) -> f64 {
        match self.angles {
            AngleSampling::Continuous => rng.random_range(0.0..TAU),
            AngleSampling::Discrete(m) => TAU * rng.random_range(0..m) as f64 / m as f64,
        }
    }

    fn random_camera(&self, rng: &mut impl Rng) -> Camera {
        let node = self.free[rng.random_range(0..self.free.len())];
        let beta = self.random_angle(rng);
        let alpha = self.random_opening(rng);
        self.camera_with_opening(node, beta, alpha)
    }

    fn perturb(&self, cam: &Camera, sigma_pos: f64, sigma_angle: f64, rng: &mut impl Rng) -> Camera {
        let step = |s: f64| Normal::new(0.0, s).expect("sigma validated");
        for _ in 0..MAX_PROPOSAL_TRIES {
            let p = cam.position
                + Vec2::new(step(sigma_pos).sample(rng), step(sigma_pos).sample(rng));
            let beta = self.snap_angle(cam.beta + step(sigma_angle).sample(rng));
            let alpha = if self.search_opening {
                (cam.alpha + step(sigma_angle).sample(rng)).clamp(1e-6, TAU)
            } else {
                cam.alpha
            };
            let Some(node) = self.grid().nearest_node(p) else { continue };
            if self.obstacles.is_blocked(node) {
                continue;
            }
            return self.camera_with_opening(node, beta, alpha);
        }
        *cam
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SAConfig {
    pub t0: f64,
    pub iterations: usize,
    pub seed: u64,
    pub n_cameras: usize,
    pub proposal: Proposal,
}

impl SAConfig {
    pub fn new(t0: f64, iterations: usize, seed: u64, n_cameras: usize) -> Self {
        Self { t0, iterations, seed, n_cameras, proposal: Proposal::Reset }
    }

    pub fn with_proposal(mut self, proposal: Proposal) -> Self {
        self.proposal = proposal;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::config(format!("initial temperature must be positive and finite, got {}", self.t0)));
        }
        if self.iterations == 0 {
            return Err(Error::config("at least one iteration is required"));
        }
        if let Proposal::Perturb { sigma_pos, sigma_angle } = self.proposal {
            if !(sigma_pos > 0.0 && sigma_pos.is_finite() && sigma_angle >= 0.0 && sigma_angle.is_finite()) {
                return Err(Error::config("perturbation scales must be positive and finite"));
            }
        }
        Ok(())
    }

    /// Temperature at iteration `k` (zero-based) of the linear schedule.
    pub fn temperature(&self, k: usize) -> f64 {
        temperature(self.t0, k, self.iterations)
    }
}

/// `T_k = max(0, T0 (1 - (k + 1) / K))`; reaches zero on the last iteration.
pub fn temperature(t0: f64, k: usize, iterations: usize) -> f64 {
    if iterations == 0 {
        return 0.0;
    }
    (t0 * (1.0 - (k + 1) as f64 / iterations as f64)).max(0.0)
}

/// Metropolis rule for maximization: `min(1, exp((new - old) / T))`, and a
/// strict greedy rule at `T = 0`.
pub fn accept_probability(old: f64, new: f64, t: f64) -> f64 {
    if new >= old {
        1.0
    } else if t <= 0.0 {
        0.0
    } else {
        ((new - old) / t).exp().min(1.0)
    }
}

/// Acceptance draws on their own random stream.
#[derive(Clone, Debug)]
pub struct Acceptor {
    rng: ChaCha8Rng,
}

impl Acceptor {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ACCEPTANCE_STREAM);
        Self { rng }
    }

    pub fn accept(&mut self, old: f64, new: f64, t: f64) -> bool {
        let u: f64 = self.rng.random();
        accept_probability(old, new, t) > u
    }
}

/// Anything that can score a camera list. Higher is better for the defender.
pub trait Scorer: Sync {
    fn score(&self, cameras: &[Camera]) -> Result<f64>;
}

impl<F> Scorer for F
where
    F: Fn(&[Camera]) -> Result<f64> + Sync,
{
    fn score(&self, cameras: &[Camera]) -> Result<f64> {
        self(cameras)
    }
}

/// The adversarial objective as a [`Scorer`]. Obstacles are rasterized once.
pub struct ObjectiveScorer<'a> {
    pub scene: &'a Scene,
    pub obstacles: &'a ObstacleMap,
    pub config: &'a ObjectiveConfig,
    pub mode: SolverMode,
}

impl Scorer for ObjectiveScorer<'_> {
    fn score(&self, cameras: &[Camera]) -> Result<f64> {
        Ok(score_cameras(self.scene, self.obstacles, cameras, self.config, self.mode)?.score)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub temperature: f64,
    pub proposed: f64,
    pub current: f64,
    pub accepted: bool,
    pub best: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SATrace {
    pub rows: Vec<TraceRow>,
}

impl SATrace {
    pub fn acceptance_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.accepted).count() as f64 / self.rows.len() as f64
    }

    /// Columns `k,T,score_proposed,accepted,score_best`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,T,score_proposed,accepted,score_best\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.k, r.temperature, r.proposed, u8::from(r.accepted), r.best);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SAResult {
    /// Best configuration seen over the whole run.
    pub best: Vec<Camera>,
    pub best_score: f64,
    /// Last accepted configuration.
    pub current: Vec<Camera>,
    pub current_score: f64,
    pub trace: SATrace,
    pub seed: u64,
}

/// One annealing chain. Deterministic in `sa.seed`.
pub fn anneal(space: &SearchSpace, sa: &SAConfig, scorer: &impl Scorer) -> Result<SAResult> {
    sa.validate()?;
    if sa.n_cameras > 0 && space.free.is_empty() {
        return Err(Error::validation("no free node to place a camera on"));
    }
    let mut prop_rng = ChaCha8Rng::seed_from_u64(sa.seed);
    prop_rng.set_stream(PROPOSAL_STREAM);
    let mut acceptor = Acceptor::new(sa.seed);

    let mut current: Vec<Camera> = (0..sa.n_cameras).map(|_| space.random_camera(&mut prop_rng)).collect();
    let mut current_score = scorer.score(&current)?;
    let mut best = current.clone();
    let mut best_score = current_score;
    let mut trace = SATrace { rows: Vec::with_capacity(sa.iterations) };

    for k in 0..sa.iterations {
        let t = sa.temperature(k);
        let proposal = propose(space, &current, sa.proposal, &mut prop_rng);
        let proposed_score = scorer.score(&proposal)?;
        let accepted = acceptor.accept(current_score, proposed_score, t);
        if accepted {
            current = proposal;
            current_score = proposed_score;
            if current_score > best_score {
                best = current.clone();
                best_score = current_score;
            }
        }
        trace.rows.push(TraceRow { k, temperature: t, proposed: proposed_score, current: current_score, accepted, best: best_score });
    }
    Ok(SAResult { best, best_score, current, current_score, trace, seed: sa.seed })
}

/// Next candidate configuration under `kind`.
pub fn propose(space: &SearchSpace, cameras: &[Camera], kind: Proposal, rng: &mut impl Rng) -> Vec<Camera> {
    let mut next = cameras.to_vec();
    if next.is_empty() {
        return next;
    }
    match kind {
        Proposal::Reset => {
            let i = rng.random_range(0..next.len());
            next[i] = space.random_camera(rng);
        }
        Proposal::Perturb { sigma_pos, sigma_angle } => {
            let i = rng.random_range(0..next.len());
            next[i] = space.perturb(&next[i], sigma_pos, sigma_angle, rng);
        }
        Proposal::FullReset => {
            for c in &mut next {
                *c = space.random_camera(rng);
            }
        }
    }
    next
}

/// Independent chains with seeds `sa.seed, sa.seed + 1, ...`, run in
/// parallel. Returns the chain with the highest best score; ties go to the
/// lower seed.
pub fn anneal_chains(space: &SearchSpace, sa: &SAConfig, chains: usize, scorer: &impl Scorer) -> Result<SAResult> {
    if chains == 0 {
        return Err(Error::config("at least one chain is required"));
    }
    let results: Vec<SAResult> = (0..chains as u64)
        .into_par_iter()
        .map(|c| anneal(space, &SAConfig { seed: sa.seed.wrapping_add(c), ..*sa }, scorer))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.best_score > results[best].best_score {
            best = i;
        }
    }
    Ok(results.into_iter().nth(best).expect("non-empty"))
}

/// Anneals camera placement on `scene` against the adversarial objective.
/// Cameras already in the scene are ignored.
pub fn simulated_annealing(
    scene: &Scene,
    grid: &GridSpec,
    objective: &ObjectiveConfig,
    mode: SolverMode,
    opening: f64,
    angles: AngleSampling,
    sa: &SAConfig,
) -> Result<SAResult> {
    let bare = Scene { cameras: Vec::new(), ..scene.clone() };
    let obstacles = bare.discretize(grid)?;
    let space = SearchSpace::new(obstacles.clone(), opening, angles)?;
    let scorer = ObjectiveScorer { scene: &bare, obstacles: &obstacles, config: objective, mode };
    anneal(&space, sa, &scorer)
}
