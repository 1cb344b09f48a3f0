//! World description: region, obstacles, cameras, and the visibility
//! predicates built on them.
//!
//! Bearings are measured clockwise from north (+y), so a camera's wedge runs
//! from `beta` clockwise to `beta + alpha`. Obstacles are rasterized onto the
//! solver grid before any visibility query; line of sight is a supercover walk
//! over that raster.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::Vec2;

/// Slack used when deciding whether a bearing sits on a wedge boundary ray.
pub const ANGLE_TOL: f64 = 1e-9;

/// Parameter-space slack for supercover corner ties.
const TIE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Self { x_min, x_max, y_min, y_max };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::validation(format!(
                "region requires x_min < x_max and y_min < y_max, got [{}, {}] x [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let eps = 1e-9 * (self.x_max - self.x_min).max(self.y_max - self.y_min);
        p.x >= self.x_min - eps
            && p.x <= self.x_max + eps
            && p.y >= self.y_min - eps
            && p.y <= self.y_max + eps
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObstacleShape {
    /// Closed axis-aligned rectangle.
    Rect { x_min: f64, x_max: f64, y_min: f64, y_max: f64 },
    /// Explicit cells, each given by a point snapped to its nearest node.
    Cells(Vec<Vec2>),
    /// Simple polygon; a node is blocked when its centre lies inside.
    Polygon(Vec<Vec2>),
}

impl ObstacleShape {
    fn vertices(&self) -> Vec<Vec2> {
        match self {
            ObstacleShape::Rect { x_min, x_max, y_min, y_max } => vec![
                Vec2::new(*x_min, *y_min),
                Vec2::new(*x_max, *y_max),
            ],
            ObstacleShape::Cells(pts) | ObstacleShape::Polygon(pts) => pts.clone(),
        }
    }

    fn validate(&self, region: &Region) -> Result<()> {
        match self {
            ObstacleShape::Rect { x_min, x_max, y_min, y_max } => {
                if !(x_min <= x_max && y_min <= y_max) {
                    return Err(Error::validation(format!(
                        "rect obstacle has inverted bounds [{x_min}, {x_max}] x [{y_min}, {y_max}]"
                    )));
                }
            }
            ObstacleShape::Polygon(pts) if pts.len() < 3 => {
                return Err(Error::validation("polygon obstacle needs at least 3 vertices"));
            }
            _ => {}
        }
        for v in self.vertices() {
            if !region.contains(v) {
                return Err(Error::validation(format!(
                    "obstacle point ({}, {}) lies outside the region",
                    v.x, v.y
                )));
            }
        }
        Ok(())
    }

    /// Marks the nodes this shape covers.
    fn rasterize_into(&self, grid: &GridSpec, blocked: &mut [bool]) {
        let tol = 1e-9 * grid.h;
        match self {
            ObstacleShape::Rect { x_min, x_max, y_min, y_max } => {
                for (idx, b) in blocked.iter_mut().enumerate() {
                    let p = grid.position(idx);
                    if p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol {
                        *b = true;
                    }
                }
            }
            ObstacleShape::Cells(pts) => {
                for p in pts {
                    if let Some(idx) = grid.nearest_node(*p) {
                        blocked[idx] = true;
                    }
                }
            }
            ObstacleShape::Polygon(pts) => {
                for (idx, b) in blocked.iter_mut().enumerate() {
                    if point_in_polygon(grid.position(idx), pts) {
                        *b = true;
                    }
                }
            }
        }
    }
}

/// Even-odd crossing test.
fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub position: Vec2,
    /// First ray of the wedge, radians clockwise from north, in `[0, 2pi)`.
    pub beta: f64,
    /// Angular opening in `(0, 2pi]`.
    pub alpha: f64,
    /// Exponent `p` of the `1/dist^p` resolution falloff.
    pub falloff: f64,
}

impl Camera {
    pub const DEFAULT_FALLOFF: f64 = 2.0;

    pub fn new(position: Vec2, beta: f64, alpha: f64) -> Result<Self> {
        Self::with_falloff(position, beta, alpha, Self::DEFAULT_FALLOFF)
    }

    pub fn with_falloff(position: Vec2, beta: f64, alpha: f64, falloff: f64) -> Result<Self> {
        if !(position.x.is_finite() && position.y.is_finite() && beta.is_finite()) {
            return Err(Error::validation("camera position and beta must be finite"));
        }
        if !(alpha > 0.0 && alpha <= TAU + ANGLE_TOL) {
            return Err(Error::validation(format!(
                "camera opening alpha must lie in (0, 2pi], got {alpha}"
            )));
        }
        if !(falloff >= 0.0 && falloff.is_finite()) {
            return Err(Error::validation(format!(
                "camera falloff exponent must be finite and non-negative, got {falloff}"
            )));
        }
        Ok(Self {
            position,
            beta: normalize_angle(beta),
            alpha: alpha.min(TAU),
            falloff,
        })
    }

    /// Whether `bearing` lies in the closed wedge `[beta, beta + alpha]` mod 2pi.
    pub fn wedge_contains(&self, bearing: f64) -> bool {
        if self.alpha >= TAU - ANGLE_TOL {
            return true;
        }
        let offset = (bearing - self.beta).rem_euclid(TAU);
        offset <= self.alpha + ANGLE_TOL || offset >= TAU - ANGLE_TOL
    }
}

/// Maps any finite angle into `[0, 2pi)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub region: Region,
    pub obstacles: Vec<ObstacleShape>,
    pub cameras: Vec<Camera>,
    pub base_speed: f64,
}

impl Scene {
    pub fn new(region: Region, base_speed: f64) -> Result<Self> {
        let scene = Self { region, obstacles: Vec::new(), cameras: Vec::new(), base_speed };
        scene.validate()?;
        Ok(scene)
    }

    pub fn with_obstacle(mut self, shape: ObstacleShape) -> Self {
        self.obstacles.push(shape);
        self
    }

    pub fn with_camera(mut self, camera: Camera) -> Self {
        self.cameras.push(camera);
        self
    }

    /// Grid-independent checks. Camera-versus-obstacle placement is checked by
    /// [`Scene::discretize`] once the obstacles have a raster.
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        if !(self.base_speed > 0.0 && self.base_speed.is_finite()) {
            return Err(Error::validation(format!(
                "base_speed must be positive, got {}",
                self.base_speed
            )));
        }
        for o in &self.obstacles {
            o.validate(&self.region)?;
        }
        for (i, c) in self.cameras.iter().enumerate() {
            if !self.region.contains(c.position) {
                return Err(Error::validation(format!(
                    "camera {i} at ({}, {}) lies outside the region",
                    c.position.x, c.position.y
                )));
            }
        }
        Ok(())
    }

    /// Rasterizes the obstacles onto `grid` and checks that the grid covers the
    /// region and no camera sits in an obstacle cell.
    pub fn discretize(&self, grid: &GridSpec) -> Result<ObstacleMap> {
        self.validate()?;
        let gr = grid.region();
        let tol = 1e-9 * self.region.width().max(self.region.height());
        let covers = (gr.x_min - self.region.x_min).abs() <= tol
            && (gr.x_max - self.region.x_max).abs() <= tol
            && (gr.y_min - self.region.y_min).abs() <= tol
            && (gr.y_max - self.region.y_max).abs() <= tol;
        if !covers {
            return Err(Error::validation(format!(
                "grid spans [{}, {}] x [{}, {}] but the region is [{}, {}] x [{}, {}]",
                gr.x_min, gr.x_max, gr.y_min, gr.y_max,
                self.region.x_min, self.region.x_max, self.region.y_min, self.region.y_max
            )));
        }
        let mut blocked = vec![false; grid.len()];
        for o in &self.obstacles {
            o.rasterize_into(grid, &mut blocked);
        }
        let map = ObstacleMap { grid: *grid, blocked };
        for (i, c) in self.cameras.iter().enumerate() {
            if map.is_blocked_at(c.position) {
                return Err(Error::validation(format!(
                    "camera {i} at ({}, {}) sits inside an obstacle",
                    c.position.x, c.position.y
                )));
            }
        }
        Ok(map)
    }

    /// Copy with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let r = &self.region;
        let s = |p: &Vec2| p * factor;
        Self {
            region: Region {
                x_min: r.x_min * factor,
                x_max: r.x_max * factor,
                y_min: r.y_min * factor,
                y_max: r.y_max * factor,
            },
            obstacles: self
                .obstacles
                .iter()
                .map(|o| match o {
                    ObstacleShape::Rect { x_min, x_max, y_min, y_max } => ObstacleShape::Rect {
                        x_min: x_min * factor,
                        x_max: x_max * factor,
                        y_min: y_min * factor,
                        y_max: y_max * factor,
                    },
                    ObstacleShape::Cells(p) => ObstacleShape::Cells(p.iter().map(s).collect()),
                    ObstacleShape::Polygon(p) => ObstacleShape::Polygon(p.iter().map(s).collect()),
                })
                .collect(),
            cameras: self
                .cameras
                .iter()
                .map(|c| Camera { position: c.position * factor, ..*c })
                .collect(),
            base_speed: self.base_speed,
        }
    }
}

/// Obstacles rasterized onto a grid: one flag per node cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleMap {
    pub grid: GridSpec,
    blocked: Vec<bool>,
}

impl ObstacleMap {
    pub fn from_blocked(grid: GridSpec, blocked: Vec<bool>) -> Result<Self> {
        if blocked.len() != grid.len() {
            return Err(Error::validation(format!(
                "obstacle mask has {} entries for a {}-node grid",
                blocked.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, blocked })
    }

    pub fn empty(grid: GridSpec) -> Self {
        Self { blocked: vec![false; grid.len()], grid }
    }

    #[inline]
    pub fn is_blocked(&self, idx: usize) -> bool {
        self.blocked[idx]
    }

    /// Whether the cell containing `p` is an obstacle cell. Off-grid is free.
    pub fn is_blocked_at(&self, p: Vec2) -> bool {
        self.grid.nearest_node(p).is_some_and(|i| self.blocked[i])
    }

    #[inline]
    pub fn is_blocked_cell(&self, cx: i64, cy: i64) -> bool {
        self.grid.checked_index(cx, cy).is_some_and(|i| self.blocked[i])
    }

    pub fn mask(&self) -> &[bool] {
        &self.blocked
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    /// Free node indices in ascending order.
    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| !self.blocked[i]).collect()
    }
}

/// Walks every cell the segment `a -> b` passes through, including cells it
/// only touches at a corner, in traversal order. `visit` returns `false` to
/// stop early. Cells are reported as signed coordinates and may be off-grid.
pub fn supercover_walk(grid: &GridSpec, a: Vec2, b: Vec2, mut visit: impl FnMut(i64, i64) -> bool) {
    let p0 = grid.to_grid(a);
    let p1 = grid.to_grid(b);
    let (mut cx, mut cy) = (p0.x.round() as i64, p0.y.round() as i64);
    if !visit(cx, cy) {
        return;
    }
    let d = p1 - p0;
    let axis = |delta: f64, start: f64, cell: i64| -> (i64, f64, f64) {
        if delta > 0.0 {
            (1, ((cell as f64 + 0.5) - start) / delta, 1.0 / delta)
        } else if delta < 0.0 {
            (-1, ((cell as f64 - 0.5) - start) / delta, -1.0 / delta)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (step_x, mut t_max_x, t_delta_x) = axis(d.x, p0.x, cx);
    let (step_y, mut t_max_y, t_delta_y) = axis(d.y, p0.y, cy);
    loop {
        let t = t_max_x.min(t_max_y);
        if t >= 1.0 - TIE_TOL {
            break;
        }
        if (t_max_x - t_max_y).abs() <= TIE_TOL {
            // Through a corner: both side cells are touched.
            if !visit(cx + step_x, cy) || !visit(cx, cy + step_y) {
                return;
            }
            cx += step_x;
            cy += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        } else if t_max_x < t_max_y {
            cx += step_x;
            t_max_x += t_delta_x;
        } else {
            cy += step_y;
            t_max_y += t_delta_y;
        }
        if !visit(cx, cy) {
            return;
        }
    }
}

/// True when some cell strictly between the endpoint cells of `a -> b` is an
/// obstacle cell.
pub fn segment_blocked(map: &ObstacleMap, a: Vec2, b: Vec2) -> bool {
    let start = map.grid.cell_of(a);
    let end = map.grid.cell_of(b);
    let mut blocked = false;
    supercover_walk(&map.grid, a, b, |cx, cy| {
        if (cx, cy) != start && (cx, cy) != end && map.is_blocked_cell(cx, cy) {
            blocked = true;
            return false;
        }
        true
    });
    blocked
}

/// Like [`segment_blocked`] but the endpoint cells count too.
pub fn segment_touches_obstacle(map: &ObstacleMap, a: Vec2, b: Vec2) -> bool {
    let mut hit = false;
    supercover_walk(&map.grid, a, b, |cx, cy| {
        hit = map.is_blocked_cell(cx, cy);
        !hit
    });
    hit
}

/// Bearing of `point` seen from the camera, clockwise from north, in `[0, 2pi)`.
pub fn bearing_from_camera(camera: &Camera, point: Vec2) -> f64 {
    let d = point - camera.position;
    normalize_angle(d.x.atan2(d.y))
}

/// Scope membership: inside the angular wedge and not occluded.
/// The camera's own position counts as seen.
pub fn in_scope(camera: &Camera, point: Vec2, obstacles: &ObstacleMap) -> bool {
    let d = point - camera.position;
    if d.x == 0.0 && d.y == 0.0 {
        return true;
    }
    camera.wedge_contains(bearing_from_camera(camera, point))
        && !segment_blocked(obstacles, camera.position, point)
}

/// Whether any camera sees `point`.
pub fn in_any_scope(cameras: &[Camera], point: Vec2, obstacles: &ObstacleMap) -> bool {
    cameras.iter().any(|c| in_scope(c, point, obstacles))
}

/// Per-node scope of one camera. Obstacle nodes are never in scope.
pub fn scope_mask(camera: &Camera, obstacles: &ObstacleMap) -> Vec<bool> {
    let grid = &obstacles.grid;
    (0..grid.len())
        .map(|i| !obstacles.is_blocked(i) && in_scope(camera, grid.position(i), obstacles))
        .collect()
}

/// Union of the scope masks of all cameras.
pub fn coverage_mask(cameras: &[Camera], obstacles: &ObstacleMap) -> Vec<bool> {
    let mut mask = vec![false; obstacles.grid.len()];
    for c in cameras {
        for (m, s) in mask.iter_mut().zip(scope_mask(c, obstacles)) {
            *m |= s;
        }
    }
    mask
}
