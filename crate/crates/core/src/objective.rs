//! Scoring camera configurations by the adversary's best response.
//!
//! The defender wants this score high: it is the adversary's cheapest
//! normalized travel cost over a set of origin/destination pairs.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::pathing::Path;
use crate::scene::{Camera, ObstacleMap, Scene};
use crate::solver::{ordered_upwind_on, EdgeCosts, SolverOptions};
use crate::windfield::{WindField, WindOptions};
use crate::Vec2;

/// Score assigned to a pair whose start cannot reach its destination.
pub const U_MAX: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Dijkstra,
    Upwind,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdPair {
    pub start: Vec2,
    pub dest: Vec2,
}

impl OdPair {
    pub fn new(start: Vec2, dest: Vec2) -> Self {
        Self { start, dest }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveConfig {
    /// Extra cost per unit length spent in camera scope (Dijkstra) or wind
    /// gain (upwind).
    pub eta: f64,
    pub od_pairs: Vec<OdPair>,
    pub aggregation: Aggregation,
    pub unreachable_penalty: f64,
    pub solver: SolverOptions,
}

impl ObjectiveConfig {
    pub fn new(eta: f64, od_pairs: Vec<OdPair>) -> Self {
        Self {
            eta,
            od_pairs,
            aggregation: Aggregation::Mean,
            unreachable_penalty: U_MAX,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_aggregation(mut self, aggregation: Aggregation) -> Self {
        self.aggregation = aggregation;
        self
    }

    fn validate(&self, obstacles: &ObstacleMap) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::config(format!("eta must be finite and non-negative, got {}", self.eta)));
        }
        if self.od_pairs.is_empty() {
            return Err(Error::config("at least one origin/destination pair is required"));
        }
        for (i, pair) in self.od_pairs.iter().enumerate() {
            for (what, p) in [("start", pair.start), ("dest", pair.dest)] {
                if !obstacles.grid.contains(p) {
                    return Err(Error::validation(format!(
                        "pair {i} {what} ({}, {}) lies outside the region",
                        p.x, p.y
                    )));
                }
                if obstacles.is_blocked_at(p) {
                    return Err(Error::validation(format!(
                        "pair {i} {what} ({}, {}) lies inside an obstacle",
                        p.x, p.y
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub start: [f64; 2],
    pub dest: [f64; 2],
    /// Raw solver value at the start node; `None` when unreachable.
    pub value: Option<f64>,
    pub normalized: f64,
    pub reachable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub score: f64,
    pub per_pair: Vec<PairScore>,
    pub mode: SolverMode,
    pub eta: f64,
    pub unreachable: bool,
}

/// Arc-length cost of a path, `sum len * (1 + eta [in scope])`, over the
/// straight-line distance between its endpoints. Zero when they coincide.
pub fn path_cost(path: &Path, eta: f64) -> f64 {
    let od = (path.end() - path.start()).norm();
    if od == 0.0 {
        return 0.0;
    }
    let weighted: f64 = path
        .segment_lengths()
        .zip(&path.segment_in_scope)
        .map(|(l, s)| l * (1.0 + if *s { eta } else { 0.0 }))
        .sum();
    weighted / od
}

/// Scores `scene.cameras` against `config`.
pub fn config_score(scene: &Scene, grid: &GridSpec, config: &ObjectiveConfig, mode: SolverMode) -> Result<ScoreReport> {
    let map = scene.discretize(grid)?;
    score_cameras(scene, &map, &scene.cameras, config, mode)
}

/// Scores an explicit camera list on a pre-rasterized scene. `scene.cameras`
/// is ignored.
pub fn score_cameras(
    scene: &Scene,
    obstacles: &ObstacleMap,
    cameras: &[Camera],
    config: &ObjectiveConfig,
    mode: SolverMode,
) -> Result<ScoreReport> {
    config.validate(obstacles)?;
    let speed = scene.base_speed;
    let values: Vec<Result<f64>> = match mode {
        SolverMode::Dijkstra => {
            let costs = EdgeCosts::build(cameras, obstacles, config.eta, config.solver.obstacle_mode)?;
            config
                .od_pairs
                .par_iter()
                .map(|pair| {
                    let field = costs.solve(obstacles, pair.dest, speed)?;
                    Ok(field.value_at(pair.start))
                })
                .collect()
        }
        SolverMode::Upwind => {
            let with_cams = Scene { cameras: cameras.to_vec(), ..scene.clone() };
            let wind_opts = WindOptions { gain: config.eta, ..WindOptions::default() };
            config
                .od_pairs
                .par_iter()
                .map(|pair| {
                    let wind = WindField::build(&with_cams, obstacles, pair.dest, &wind_opts)?;
                    let field = ordered_upwind_on(obstacles, &wind, speed, pair.dest, &config.solver)?;
                    // time units -> distance-equivalent at base speed
                    Ok(field.value_at(pair.start) * speed)
                })
                .collect()
        }
    };

    let mut per_pair = Vec::with_capacity(values.len());
    for (pair, value) in config.od_pairs.iter().zip(values) {
        let value = value?;
        let od = (pair.dest - pair.start).norm();
        let reachable = value.is_finite();
        let normalized = if !reachable {
            config.unreachable_penalty
        } else if od == 0.0 {
            0.0
        } else {
            value / od
        };
        per_pair.push(PairScore {
            start: [pair.start.x, pair.start.y],
            dest: [pair.dest.x, pair.dest.y],
            value: reachable.then_some(value),
            normalized,
            reachable,
        });
    }
    // Summation in pair order keeps the score reproducible.
    let score = match config.aggregation {
        Aggregation::Mean => per_pair.iter().map(|p| p.normalized).sum::<f64>() / per_pair.len() as f64,
        Aggregation::Min => per_pair.iter().map(|p| p.normalized).fold(f64::INFINITY, f64::min),
    };
    Ok(ScoreReport {
        score,
        unreachable: per_pair.iter().any(|p| !p.reachable),
        per_pair,
        mode,
        eta: config.eta,
    })
}

/// Up to `budget` ordered pairs of distinct free boundary nodes, sampled
/// without replacement with a fixed seed.
pub fn boundary_od_pairs(obstacles: &ObstacleMap, budget: usize, seed: u64) -> Vec<OdPair> {
    let g = &obstacles.grid;
    let boundary: Vec<usize> = obstacles
        .free_nodes()
        .into_iter()
        .filter(|&i| {
            let (x, y) = g.coords(i);
            x == 0 || y == 0 || x + 1 == g.nx || y + 1 == g.ny
        })
        .collect();
    let b = boundary.len();
    if b < 2 {
        return Vec::new();
    }
    let total = b * (b - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, total, budget.min(total)).into_vec();
    picks.sort_unstable();
    picks
        .into_iter()
        .map(|k| {
            let (i, r) = (k / (b - 1), k % (b - 1));
            let j = if r >= i { r + 1 } else { r };
            OdPair::new(g.position(boundary[i]), g.position(boundary[j]))
        })
        .collect()
}
