//! Ordered upwind front expansion.
//!
//! The grid is triangulated by splitting every cell along its south-west to
//! north-east diagonal, so each node has six mesh neighbours. Nodes are
//! accepted in non-decreasing value order. A considered node takes the best
//! valid update over accepted-front simplices and single front nodes within
//! `gamma * sqrt(2) * h`, where `gamma` is the anisotropy ratio of the wind.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use super::{
    edge_update, obstacle_treatment, simplex_update, NodeState, Predecessor, SolverDiagnostics, SolverOptions,
    ValueField,
};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scene::{ObstacleMap, Scene};
use crate::windfield::{destination_node, WindField};
use crate::Vec2;

/// Mesh neighbours in counter-clockwise order.
const MESH: [(i64, i64); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];

pub fn ordered_upwind(
    scene: &Scene,
    grid: &GridSpec,
    wind: &WindField,
    destination: Vec2,
    opts: &SolverOptions,
) -> Result<ValueField> {
    let map = scene.discretize(grid)?;
    ordered_upwind_on(&map, wind, scene.base_speed, destination, opts)
}

/// Same as [`ordered_upwind`] on an already rasterized obstacle map.
pub fn ordered_upwind_on(
    obstacles: &ObstacleMap,
    wind: &WindField,
    base_speed: f64,
    destination: Vec2,
    opts: &SolverOptions,
) -> Result<ValueField> {
    let grid = obstacles.grid;
    if wind.grid != grid {
        return Err(Error::validation("wind field was built on a different grid"));
    }
    if !(base_speed > 0.0) {
        return Err(Error::validation(format!("base_speed must be positive, got {base_speed}")));
    }
    if !(wind.max_magnitude() < base_speed) {
        return Err(Error::validation("wind magnitude reaches base_speed"));
    }
    let dest = destination_node(obstacles, destination)?;
    let (removed, speed_scale) = obstacle_treatment(obstacles, opts.obstacle_mode)?;

    let gamma = wind.anisotropy_ratio(base_speed);
    let radius = gamma * std::f64::consts::SQRT_2;
    let reach = radius.floor() as i64;
    let r2 = radius * radius * (1.0 + 1e-12);
    let window: Vec<(i64, i64)> = (-reach..=reach)
        .flat_map(|dy| (-reach..=reach).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| (dx, dy) != (0, 0) && ((dx * dx + dy * dy) as f64) <= r2)
        .collect();

    let mut solver = Upwind {
        grid,
        wind,
        base_speed,
        removed: &removed,
        speed_scale: &speed_scale,
        window: &window,
        r2,
        u: vec![f64::INFINITY; grid.len()],
        state: vec![NodeState::Far; grid.len()],
        front: vec![false; grid.len()],
        pred: vec![Predecessor::None; grid.len()],
        order: Vec::with_capacity(grid.len()),
        heap: BinaryHeap::new(),
        front_value: 0.0,
        diag: SolverDiagnostics { anisotropy: gamma, stencil_radius: radius, ..Default::default() },
    };
    solver.u[dest] = 0.0;
    solver.pred[dest] = Predecessor::Source;
    solver.accept(dest);
    while let Some(Reverse((OrderedFloat(v), idx))) = solver.heap.pop() {
        if solver.state[idx] != NodeState::Considered || v != solver.u[idx] {
            continue;
        }
        solver.front_value = v;
        solver.accept(idx);
    }

    let Upwind { u, state, pred, order, diag, .. } = solver;
    Ok(ValueField {
        grid,
        values: u,
        state,
        predecessor: pred,
        destination,
        destination_node: dest,
        base_speed,
        speed_scale,
        removed,
        acceptance_order: order,
        diagnostics: diag,
    })
}

struct Upwind<'a> {
    grid: GridSpec,
    wind: &'a WindField,
    base_speed: f64,
    removed: &'a [bool],
    speed_scale: &'a [f64],
    window: &'a [(i64, i64)],
    r2: f64,
    u: Vec<f64>,
    state: Vec<NodeState>,
    /// Accepted nodes that still have a non-accepted mesh neighbour.
    front: Vec<bool>,
    pred: Vec<Predecessor>,
    order: Vec<usize>,
    heap: BinaryHeap<Reverse<(OrderedFloat<f64>, usize)>>,
    front_value: f64,
    diag: SolverDiagnostics,
}

impl Upwind<'_> {
    fn offset(&self, idx: usize, (dx, dy): (i64, i64)) -> Option<usize> {
        let (ix, iy) = self.grid.coords(idx);
        self.grid.checked_index(ix as i64 + dx, iy as i64 + dy)
    }

    fn mesh_neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        MESH.iter().filter_map(move |&o| self.offset(idx, o)).filter(|&n| !self.removed[n])
    }

    fn is_mesh_adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
        let d = (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
        MESH.contains(&d)
    }

    fn has_open_neighbor(&self, idx: usize) -> bool {
        self.mesh_neighbors(idx).any(|n| self.state[n] != NodeState::Accepted)
    }

    fn accept(&mut self, idx: usize) {
        self.state[idx] = NodeState::Accepted;
        self.order.push(idx);
        self.front[idx] = self.has_open_neighbor(idx);
        let neighbors: Vec<usize> = self.mesh_neighbors(idx).collect();
        for &n in &neighbors {
            if self.front[n] {
                self.front[n] = self.has_open_neighbor(n);
            }
        }

        let here = self.grid.coords(idx);
        for k in 0..self.window.len() {
            let Some(x) = self.offset(idx, self.window[k]) else { continue };
            if self.removed[x] {
                continue;
            }
            match self.state[x] {
                NodeState::Accepted => {}
                NodeState::Far => {
                    if Self::is_mesh_adjacent(here, self.grid.coords(x)) {
                        self.state[x] = NodeState::Considered;
                        self.full_update(x);
                    }
                }
                NodeState::Considered => self.partial_update(x, idx),
            }
        }
    }

    /// Recomputes a newly considered node from every front simplex in reach.
    fn full_update(&mut self, x: usize) {
        let mut best = (f64::INFINITY, Predecessor::None);
        for k in 0..self.window.len() {
            let Some(y) = self.offset(x, self.window[k]) else { continue };
            if !self.front[y] {
                continue;
            }
            self.try_edge(x, y, &mut best);
            for o in MESH {
                let Some(z) = self.offset(y, o) else { continue };
                // each in-window pair once; pairs leaving the window from this end only
                if self.front[z] && z != x && (z > y || !self.within_window(x, z)) {
                    self.try_simplex(x, y, z, &mut best);
                }
            }
        }
        self.commit(x, best);
    }

    /// Updates a considered node with simplices that involve the newly accepted node.
    fn partial_update(&mut self, x: usize, new: usize) {
        let mut best = (self.u[x], self.pred[x]);
        self.try_edge(x, new, &mut best);
        for z in MESH.map(|o| self.offset(new, o)).into_iter().flatten() {
            if self.front[z] && z != x {
                self.try_simplex(x, new, z, &mut best);
            }
        }
        if best.0 < self.u[x] {
            self.commit(x, best);
        }
    }

    fn within_window(&self, x: usize, y: usize) -> bool {
        let (a, b) = (self.grid.coords(x), self.grid.coords(y));
        let (dx, dy) = (b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
        ((dx * dx + dy * dy) as f64) <= self.r2
    }

    fn local_speed(&self, x: usize) -> (f64, Vec2) {
        let s = self.speed_scale[x];
        (s * self.base_speed, s * self.wind.at(x))
    }

    fn try_edge(&mut self, x: usize, y: usize, best: &mut (f64, Predecessor)) {
        self.diag.updates += 1;
        let (v, w) = self.local_speed(x);
        let cand = edge_update(self.grid.position(x), self.grid.position(y), self.u[y], w, v);
        if cand < best.0 {
            *best = (cand, Predecessor::Edge(y));
        }
    }

    fn try_simplex(&mut self, x: usize, j: usize, k: usize, best: &mut (f64, Predecessor)) {
        self.diag.updates += 1;
        let (v, w) = self.local_speed(x);
        let g = &self.grid;
        let upd = simplex_update(g.position(x), g.position(j), g.position(k), self.u[j], self.u[k], w, v);
        if let Some(cand) = upd.value() {
            if cand < best.0 {
                *best = (cand, Predecessor::Simplex(j, k));
            }
        }
    }

    fn commit(&mut self, x: usize, (mut value, pred): (f64, Predecessor)) {
        if !value.is_finite() {
            return;
        }
        if value < self.front_value {
            self.diag.clamped += 1;
            value = self.front_value;
        }
        self.u[x] = value;
        self.pred[x] = pred;
        self.heap.push(Reverse((OrderedFloat(value), x)));
    }
}
