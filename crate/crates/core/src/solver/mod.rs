//! Minimum-time value function `u`, expanded outward from the destination.
//!
//! Two front-expansion modes share one output type:
//! * [`ordered_upwind`] solves the anisotropic Hamilton-Jacobi equation on a
//!   triangulated grid with quadratic simplex updates;
//! * [`grid_dijkstra`] runs an exact 4-connected shortest-path search whose
//!   edge weights charge `eta` extra per unit length spent in camera scope.

mod dijkstra;
mod simplex;
mod upwind;

pub use dijkstra::{grid_dijkstra, EdgeCosts};
pub use simplex::{edge_update, simplex_update, SimplexUpdate};
pub use upwind::{ordered_upwind, ordered_upwind_on};

pub use crate::grid::GridSpec;

use crate::error::{Error, Result};
use crate::scene::ObstacleMap;
use crate::windfield::cell_fraction;
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeState {
    Far,
    Considered,
    Accepted,
}

/// Which accepted nodes produced a node's final value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predecessor {
    None,
    /// The destination itself.
    Source,
    /// One-sided update from a single node (the next hop in Dijkstra mode).
    Edge(usize),
    /// Two-point simplex update.
    Simplex(usize, usize),
}

impl Predecessor {
    pub fn nodes(&self) -> Vec<usize> {
        match *self {
            Predecessor::Edge(j) => vec![j],
            Predecessor::Simplex(j, k) => vec![j, k],
            _ => Vec::new(),
        }
    }
}

/// How obstacle cells enter the solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ObstacleMode {
    /// Obstacle nodes are removed from the graph / mesh.
    #[default]
    Delete,
    /// Obstacle nodes stay but the front slows to `(1 - xi_max) F` there.
    SlowDown { xi_max: f64 },
}

impl ObstacleMode {
    pub const DEFAULT_XI_MAX: f64 = 0.99;

    pub fn slow_down() -> Self {
        ObstacleMode::SlowDown { xi_max: Self::DEFAULT_XI_MAX }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverOptions {
    pub obstacle_mode: ObstacleMode,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolverDiagnostics {
    /// Max over nodes of `(V + |W|) / (V - |W|)`.
    pub anisotropy: f64,
    /// Search radius of the accepted-front neighbourhood, in grid units.
    pub stencil_radius: f64,
    /// Local solves evaluated.
    pub updates: usize,
    /// Candidates raised to the current front value to keep acceptance monotone.
    pub clamped: usize,
}

#[derive(Clone, Debug)]
pub struct ValueField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub state: Vec<NodeState>,
    pub predecessor: Vec<Predecessor>,
    pub destination: Vec2,
    pub destination_node: usize,
    pub base_speed: f64,
    /// Per-node front-speed multiplier `1 - xi`; all ones unless slowing down obstacles.
    pub speed_scale: Vec<f64>,
    /// Nodes removed from the mesh.
    pub removed: Vec<bool>,
    /// Node indices in the order they were accepted.
    pub acceptance_order: Vec<usize>,
    pub diagnostics: SolverDiagnostics,
}

impl ValueField {
    #[inline]
    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Value at the node whose cell contains `p`.
    pub fn value_at(&self, p: Vec2) -> f64 {
        self.grid.nearest_node(p).map_or(f64::INFINITY, |i| self.values[i])
    }

    pub fn is_reachable(&self, idx: usize) -> bool {
        self.values[idx].is_finite()
    }

    /// Values in acceptance order.
    pub fn accepted_values(&self) -> Vec<f64> {
        self.acceptance_order.iter().map(|&i| self.values[i]).collect()
    }

    /// Bilinear interpolation over the finite corners of the enclosing cell.
    pub fn interpolate(&self, p: Vec2) -> f64 {
        let g = self.grid.to_grid(p);
        let (i0, tx) = cell_fraction(g.x, self.grid.nx);
        let (j0, ty) = cell_fraction(g.y, self.grid.ny);
        let corners = [
            (i0, j0, (1.0 - tx) * (1.0 - ty)),
            (i0 + 1, j0, tx * (1.0 - ty)),
            (i0, j0 + 1, (1.0 - tx) * ty),
            (i0 + 1, j0 + 1, tx * ty),
        ];
        let (mut acc, mut wsum) = (0.0, 0.0);
        for (i, j, w) in corners {
            let v = self.values[self.grid.index(i, j)];
            if v.is_finite() && w > 0.0 {
                acc += w * v;
                wsum += w;
            }
        }
        if wsum > 0.0 {
            acc / wsum
        } else {
            self.value_at(p)
        }
    }
}

/// Wavefront speed `V - <n, W>` for unit normal `n`.
#[inline]
pub fn front_speed(n: Vec2, wind: Vec2, speed: f64) -> f64 {
    speed - n.dot(&wind)
}

/// Ground speed achievable along unit direction `d` when the control has
/// magnitude `speed` and the medium drifts with `wind` (`|wind| < speed`).
#[inline]
pub fn ray_speed(d: Vec2, wind: Vec2, speed: f64) -> f64 {
    let dw = d.dot(&wind);
    dw + (speed * speed - wind.norm_squared() + dw * dw).max(0.0).sqrt()
}

/// Front speed slowed by the obstacle map value `xi`.
pub fn obstacle_speed_scaling(front_speed: f64, xi: f64, xi_max: f64) -> Result<f64> {
    check_xi_max(xi_max)?;
    if !(0.0..=xi_max).contains(&xi) {
        return Err(Error::config(format!("xi = {xi} outside [0, {xi_max}]")));
    }
    Ok((1.0 - xi) * front_speed)
}

fn check_xi_max(xi_max: f64) -> Result<()> {
    if !(0.0..1.0).contains(&xi_max) {
        return Err(Error::config(format!("xi_max must lie in [0, 1), got {xi_max}")));
    }
    Ok(())
}

/// Per-node removal flags and speed multipliers for an obstacle mode.
pub(crate) fn obstacle_treatment(map: &ObstacleMap, mode: ObstacleMode) -> Result<(Vec<bool>, Vec<f64>)> {
    let n = map.grid.len();
    match mode {
        ObstacleMode::Delete => Ok((map.mask().to_vec(), vec![1.0; n])),
        ObstacleMode::SlowDown { xi_max } => {
            check_xi_max(xi_max)?;
            let scale = (0..n)
                .map(|i| if map.is_blocked(i) { 1.0 - xi_max } else { 1.0 })
                .collect();
            Ok((vec![false; n], scale))
        }
    }
}
