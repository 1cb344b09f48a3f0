//! Regular node grid shared by every solver, mask and path.
//!
//! Nodes sit at `origin + (ix * h, iy * h)` and are indexed row-major,
//! `iy * nx + ix`. Each node owns the square cell of side `h` centred on it;
//! obstacle rasterization and line-of-sight tests work on those cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Region;
use crate::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: [f64; 2],
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, h: f64, origin: Vec2) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::validation(format!(
                "grid needs at least 2 nodes per axis, got {nx}x{ny}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::validation(format!("grid spacing must be positive, got {h}")));
        }
        Ok(Self { nx, ny, h, origin: [origin.x, origin.y] })
    }

    /// Grid of `nx` x `ny` nodes whose outermost nodes sit on the region boundary.
    /// The region aspect ratio must allow square cells.
    pub fn covering(region: &Region, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::validation(format!(
                "grid needs at least 2 nodes per axis, got {nx}x{ny}"
            )));
        }
        let hx = (region.x_max - region.x_min) / (nx - 1) as f64;
        let hy = (region.y_max - region.y_min) / (ny - 1) as f64;
        if (hx - hy).abs() > 1e-9 * hx.max(hy) {
            return Err(Error::validation(format!(
                "grid {nx}x{ny} gives non-square cells ({hx} x {hy}) over the region"
            )));
        }
        Self::new(nx, ny, hx, Vec2::new(region.x_min, region.y_min))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn origin(&self) -> Vec2 {
        Vec2::new(self.origin[0], self.origin[1])
    }

    pub fn region(&self) -> Region {
        Region {
            x_min: self.origin[0],
            x_max: self.origin[0] + (self.nx - 1) as f64 * self.h,
            y_min: self.origin[1],
            y_max: self.origin[1] + (self.ny - 1) as f64 * self.h,
        }
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    /// Index of the node at signed coordinates, if it exists.
    #[inline]
    pub fn checked_index(&self, ix: i64, iy: i64) -> Option<usize> {
        if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
            None
        } else {
            Some(self.index(ix as usize, iy as usize))
        }
    }

    #[inline]
    pub fn position(&self, idx: usize) -> Vec2 {
        let (ix, iy) = self.coords(idx);
        Vec2::new(
            self.origin[0] + ix as f64 * self.h,
            self.origin[1] + iy as f64 * self.h,
        )
    }

    /// Continuous grid coordinates: node `(ix, iy)` maps to `(ix, iy)`.
    #[inline]
    pub fn to_grid(&self, p: Vec2) -> Vec2 {
        Vec2::new((p.x - self.origin[0]) / self.h, (p.y - self.origin[1]) / self.h)
    }

    /// Signed cell coordinates of the cell containing `p`; may lie off-grid.
    #[inline]
    pub fn cell_of(&self, p: Vec2) -> (i64, i64) {
        let g = self.to_grid(p);
        (g.x.round() as i64, g.y.round() as i64)
    }

    /// Node whose cell contains `p`, or `None` outside the grid.
    pub fn nearest_node(&self, p: Vec2) -> Option<usize> {
        let (ix, iy) = self.cell_of(p);
        self.checked_index(ix, iy)
    }

    /// Whether `p` lies inside the grid's node hull (with a tiny tolerance).
    pub fn contains(&self, p: Vec2) -> bool {
        let g = self.to_grid(p);
        let eps = 1e-9;
        g.x >= -eps
            && g.y >= -eps
            && g.x <= (self.nx - 1) as f64 + eps
            && g.y <= (self.ny - 1) as f64 + eps
    }

    /// Four axis-aligned neighbours, in the order +x, +y, -x, -y.
    pub fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (ix, iy) = self.coords(idx);
        let (ix, iy) = (ix as i64, iy as i64);
        [(1, 0), (0, 1), (-1, 0), (0, -1)]
            .into_iter()
            .filter_map(move |(dx, dy)| self.checked_index(ix + dx, iy + dy))
    }

    /// The same grid with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            h: self.h * factor,
            origin: [self.origin[0] * factor, self.origin[1] * factor],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_rejects_non_square_cells() {
        let region = Region::new(0.0, 10.0, 0.0, 5.0).unwrap();
        assert!(GridSpec::covering(&region, 11, 6).is_ok());
        assert!(GridSpec::covering(&region, 11, 11).is_err());
    }

    #[test]
    fn index_round_trip_and_positions() {
        let g = GridSpec::new(4, 3, 0.5, Vec2::new(1.0, -1.0)).unwrap();
        for idx in 0..g.len() {
            let (ix, iy) = g.coords(idx);
            assert_eq!(g.index(ix, iy), idx);
            assert_eq!(g.nearest_node(g.position(idx)), Some(idx));
        }
        assert_eq!(g.position(g.index(3, 2)), Vec2::new(2.5, 0.0));
        assert_eq!(g.nearest_node(Vec2::new(10.0, 0.0)), None);
    }

    #[test]
    fn corner_has_two_neighbors() {
        let g = GridSpec::new(3, 3, 1.0, Vec2::zeros()).unwrap();
        assert_eq!(g.neighbors4(0).count(), 2);
        assert_eq!(g.neighbors4(4).count(), 4);
    }

    #[test]
    fn rejects_degenerate_grid() {
        assert!(GridSpec::new(1, 5, 1.0, Vec2::zeros()).is_err());
        assert!(GridSpec::new(5, 5, 0.0, Vec2::zeros()).is_err());
    }
}
