//! Adversarial path planning through camera-monitored regions, and camera
//! placement against the resulting best-response paths.
//!
//! Grid nodes are cell centres. Angles are bearings measured clockwise from
//! north (the +y axis) in radians.

pub mod error;
pub mod grid;
pub mod io;
pub mod objective;
pub mod pathing;
pub mod placement;
pub mod render;
pub mod scene;
pub mod solver;
pub mod windfield;

/// Planar point or vector.
pub type Vec2 = nalgebra::Vector2<f64>;

pub use error::{Error, Result};
pub use grid::GridSpec;
pub use objective::{config_score, path_cost, Aggregation, ObjectiveConfig, OdPair, ScoreReport, SolverMode};
pub use placement::{anneal, simulated_annealing, AngleSampling, Proposal, SAConfig, SAResult, SearchSpace};
pub use pathing::{extract_path_characteristic, extract_path_discrete, smooth_path, Path};
pub use scene::{in_scope, Camera, ObstacleMap, ObstacleShape, Region, Scene};
pub use solver::{grid_dijkstra, ordered_upwind, ObstacleMode, SolverOptions, ValueField};
pub use windfield::{build_wind_field, WindField, WindOptions};
