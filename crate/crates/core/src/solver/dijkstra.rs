use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use super::{obstacle_treatment, NodeState, ObstacleMode, Predecessor, SolverDiagnostics, SolverOptions, ValueField};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scene::{in_any_scope, Camera, ObstacleMap, Scene};
use crate::windfield::destination_node;
use crate::Vec2;

/// Weighted 4-connected grid graph. An edge costs `h * (1 + eta)` when its
/// midpoint is seen by some camera and `h` otherwise, divided by the smaller
/// endpoint speed multiplier in slow-down mode.
#[derive(Clone, Debug)]
pub struct EdgeCosts {
    pub grid: GridSpec,
    pub eta: f64,
    removed: Vec<bool>,
    speed_scale: Vec<f64>,
    /// Edge `i -> i + 1`; infinite when absent.
    east: Vec<f64>,
    /// Edge `i -> i + nx`; infinite when absent.
    north: Vec<f64>,
    east_scope: Vec<bool>,
    north_scope: Vec<bool>,
}

impl EdgeCosts {
    pub fn build(cameras: &[Camera], obstacles: &ObstacleMap, eta: f64, mode: ObstacleMode) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::config(format!("eta must be finite and non-negative, got {eta}")));
        }
        let grid = obstacles.grid;
        let (removed, speed_scale) = obstacle_treatment(obstacles, mode)?;
        let n = grid.len();
        let mut east = vec![f64::INFINITY; n];
        let mut north = vec![f64::INFINITY; n];
        let mut east_scope = vec![false; n];
        let mut north_scope = vec![false; n];
        for i in 0..n {
            if removed[i] {
                continue;
            }
            let (ix, iy) = grid.coords(i);
            let link = |j: usize, cost: &mut f64, scope: &mut bool| {
                if removed[j] {
                    return;
                }
                let mid = 0.5 * (grid.position(i) + grid.position(j));
                *scope = in_any_scope(cameras, mid, obstacles);
                let slow = speed_scale[i].min(speed_scale[j]);
                *cost = grid.h * (1.0 + if *scope { eta } else { 0.0 }) / slow;
            };
            if ix + 1 < grid.nx {
                link(i + 1, &mut east[i], &mut east_scope[i]);
            }
            if iy + 1 < grid.ny {
                link(i + grid.nx, &mut north[i], &mut north_scope[i]);
            }
        }
        Ok(Self { grid, eta, removed, speed_scale, east, north, east_scope, north_scope })
    }

    fn slot(&self, a: usize, b: usize) -> Option<(usize, bool)> {
        let (lo, hi) = (a.min(b), a.max(b));
        if hi == lo + 1 && lo % self.grid.nx + 1 < self.grid.nx {
            Some((lo, true))
        } else if hi == lo + self.grid.nx {
            Some((lo, false))
        } else {
            None
        }
    }

    /// Cost of the edge between 4-neighbours `a` and `b`; infinite otherwise.
    pub fn cost(&self, a: usize, b: usize) -> f64 {
        match self.slot(a, b) {
            Some((lo, true)) => self.east[lo],
            Some((lo, false)) => self.north[lo],
            None => f64::INFINITY,
        }
    }

    /// Whether the edge midpoint between `a` and `b` is in some camera's scope.
    pub fn in_scope(&self, a: usize, b: usize) -> bool {
        match self.slot(a, b) {
            Some((lo, true)) => self.east_scope[lo],
            Some((lo, false)) => self.north_scope[lo],
            None => false,
        }
    }

    pub fn is_removed(&self, idx: usize) -> bool {
        self.removed[idx]
    }

    /// Existing edges out of `idx` with their costs.
    pub fn edges(&self, idx: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.grid
            .neighbors4(idx)
            .map(move |j| (j, self.cost(idx, j)))
            .filter(|(_, c)| c.is_finite())
    }

    /// Shortest-path tree rooted at the node containing `destination`.
    pub fn solve(&self, obstacles: &ObstacleMap, destination: Vec2, base_speed: f64) -> Result<ValueField> {
        let grid = self.grid;
        let dest = destination_node(obstacles, destination)?;
        let n = grid.len();
        let mut u = vec![f64::INFINITY; n];
        let mut state = vec![NodeState::Far; n];
        let mut pred = vec![Predecessor::None; n];
        let mut order = Vec::with_capacity(n);
        let mut heap = BinaryHeap::new();
        let mut updates = 0;
        u[dest] = 0.0;
        pred[dest] = Predecessor::Source;
        state[dest] = NodeState::Considered;
        heap.push(Reverse((OrderedFloat(0.0), dest)));
        while let Some(Reverse((OrderedFloat(v), i))) = heap.pop() {
            if state[i] == NodeState::Accepted || v != u[i] {
                continue;
            }
            state[i] = NodeState::Accepted;
            order.push(i);
            for (j, c) in self.edges(i) {
                if state[j] == NodeState::Accepted {
                    continue;
                }
                updates += 1;
                let cand = v + c;
                if cand < u[j] {
                    u[j] = cand;
                    pred[j] = Predecessor::Edge(i);
                    state[j] = NodeState::Considered;
                    heap.push(Reverse((OrderedFloat(cand), j)));
                }
            }
        }
        Ok(ValueField {
            grid,
            values: u,
            state,
            predecessor: pred,
            destination,
            destination_node: dest,
            base_speed,
            speed_scale: self.speed_scale.clone(),
            removed: self.removed.clone(),
            acceptance_order: order,
            diagnostics: SolverDiagnostics { anisotropy: 1.0, stencil_radius: 1.0, updates, clamped: 0 },
        })
    }
}

/// Exact 4-connected shortest paths to `destination` with visibility-weighted
/// edge costs.
pub fn grid_dijkstra(
    scene: &Scene,
    grid: &GridSpec,
    destination: Vec2,
    eta: f64,
    opts: &SolverOptions,
) -> Result<ValueField> {
    let map = scene.discretize(grid)?;
    let costs = EdgeCosts::build(&scene.cameras, &map, eta, opts.obstacle_mode)?;
    costs.solve(&map, destination, scene.base_speed)
}
