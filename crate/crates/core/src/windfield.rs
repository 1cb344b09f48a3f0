//! Camera-induced headwind.
//!
//! Inside the union of camera scopes the adversary feels a wind pointing away
//! from the destination with magnitude `sum_i 1/dist_i^p`, clamped so the net
//! speed toward the destination stays at least `eps_cap * base_speed`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scene::{scope_mask, ObstacleMap, Scene};
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindOptions {
    /// Fraction of `base_speed` the wind may never eat into.
    pub eps_cap: f64,
    /// Multiplier on every camera's magnitude; the objective uses it to carry
    /// the visibility weight into the continuous solver.
    pub gain: f64,
}

impl Default for WindOptions {
    fn default() -> Self {
        Self { eps_cap: 0.05, gain: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindField {
    pub grid: GridSpec,
    pub vectors: Vec<Vec2>,
    pub destination: Vec2,
}

impl WindField {
    /// Field with no wind anywhere.
    pub fn zero(grid: GridSpec, destination: Vec2) -> Self {
        Self { vectors: vec![Vec2::zeros(); grid.len()], grid, destination }
    }

    /// Wraps precomputed vectors, checking that none reaches `base_speed`.
    pub fn from_vectors(grid: GridSpec, destination: Vec2, vectors: Vec<Vec2>, base_speed: f64) -> Result<Self> {
        if vectors.len() != grid.len() {
            return Err(Error::validation(format!(
                "wind has {} vectors for a {}-node grid",
                vectors.len(),
                grid.len()
            )));
        }
        if let Some(i) = vectors.iter().position(|w| !(w.norm() < base_speed)) {
            return Err(Error::validation(format!(
                "wind magnitude {} at node {i} reaches base_speed {base_speed}",
                vectors[i].norm()
            )));
        }
        Ok(Self { grid, vectors, destination })
    }

    pub fn build(scene: &Scene, obstacles: &ObstacleMap, destination: Vec2, opts: &WindOptions) -> Result<Self> {
        if !(opts.eps_cap > 0.0 && opts.eps_cap < 1.0) {
            return Err(Error::config(format!("eps_cap must lie in (0, 1), got {}", opts.eps_cap)));
        }
        if !(opts.gain >= 0.0 && opts.gain.is_finite()) {
            return Err(Error::config(format!("wind gain must be non-negative, got {}", opts.gain)));
        }
        let grid = obstacles.grid;
        let dest_node = destination_node(obstacles, destination)?;
        let cap = (1.0 - opts.eps_cap) * scene.base_speed;

        let masks: Vec<Vec<bool>> = scene.cameras.iter().map(|c| scope_mask(c, obstacles)).collect();
        let vectors = (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                let to_dest = destination - x;
                if i == dest_node || to_dest.norm() == 0.0 {
                    return Vec2::zeros();
                }
                let mut magnitude = 0.0;
                let mut seen = false;
                for (cam, mask) in scene.cameras.iter().zip(&masks) {
                    if mask[i] {
                        seen = true;
                        let d = (x - cam.position).norm();
                        // infinite at the camera itself unless p = 0
                        magnitude += d.powf(-cam.falloff);
                    }
                }
                if !seen || opts.gain == 0.0 {
                    return Vec2::zeros();
                }
                let m = (opts.gain * magnitude).min(cap);
                -m * to_dest / to_dest.norm()
            })
            .collect();
        Ok(Self { grid, vectors, destination })
    }

    #[inline]
    pub fn at(&self, idx: usize) -> Vec2 {
        self.vectors[idx]
    }

    /// Bilinear interpolation of the nodal vectors; clamps to the grid hull.
    pub fn sample(&self, p: Vec2) -> Vec2 {
        let g = self.grid.to_grid(p);
        let (i0, tx) = cell_fraction(g.x, self.grid.nx);
        let (j0, ty) = cell_fraction(g.y, self.grid.ny);
        let v = |i, j| self.vectors[self.grid.index(i, j)];
        v(i0, j0) * ((1.0 - tx) * (1.0 - ty))
            + v(i0 + 1, j0) * (tx * (1.0 - ty))
            + v(i0, j0 + 1) * ((1.0 - tx) * ty)
            + v(i0 + 1, j0 + 1) * (tx * ty)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.vectors.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// Max over nodes of `(V + |W|) / (V - |W|)`.
    pub fn anisotropy_ratio(&self, base_speed: f64) -> f64 {
        let m = self.max_magnitude();
        (base_speed + m) / (base_speed - m)
    }

    /// `x,y,wx,wy` rows in node order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,wx,wy\n");
        for (i, w) in self.vectors.iter().enumerate() {
            let p = self.grid.position(i);
            let _ = writeln!(out, "{},{},{},{}", p.x, p.y, w.x, w.y);
        }
        out
    }
}

/// Lower-left node index and fractional offset inside that cell, clamped so the
/// upper neighbour exists.
pub(crate) fn cell_fraction(g: f64, n: usize) -> (usize, f64) {
    let max = (n - 2) as f64;
    let base = g.floor().clamp(0.0, max);
    let t = (g - base).clamp(0.0, 1.0);
    (base as usize, t)
}

/// Node the destination snaps to; fails if it is off-grid or blocked.
pub(crate) fn destination_node(obstacles: &ObstacleMap, destination: Vec2) -> Result<usize> {
    if !obstacles.grid.contains(destination) {
        return Err(Error::validation(format!(
            "destination ({}, {}) lies outside the region",
            destination.x, destination.y
        )));
    }
    let idx = obstacles
        .grid
        .nearest_node(destination)
        .ok_or_else(|| Error::validation("destination has no grid node"))?;
    if obstacles.is_blocked(idx) {
        return Err(Error::validation(format!(
            "destination ({}, {}) lies inside an obstacle",
            destination.x, destination.y
        )));
    }
    Ok(idx)
}

/// Convenience wrapper: rasterizes the scene and uses default options.
pub fn build_wind_field(scene: &Scene, destination: Vec2, grid: &GridSpec) -> Result<WindField> {
    let map = scene.discretize(grid)?;
    WindField::build(scene, &map, destination, &WindOptions::default())
}
