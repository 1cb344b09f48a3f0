//! Adversary trajectories recovered from a value field.

use crate::error::{Error, Result};
use crate::scene::{in_any_scope, segment_touches_obstacle, Camera, ObstacleMap};
use crate::solver::{ray_speed, Predecessor, ValueField};
use crate::windfield::WindField;
use crate::Vec2;

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    /// Start first, destination last.
    pub points: Vec<Vec2>,
    /// Time (or cost, for discrete paths) spent on each segment.
    pub segment_times: Vec<f64>,
    /// Whether each segment's midpoint is seen by some camera.
    pub segment_in_scope: Vec<bool>,
    /// Whether each point is seen by some camera.
    pub point_in_scope: Vec<bool>,
    pub total_time: f64,
    /// In-scope length over total length.
    pub visible_fraction: f64,
}

impl Path {
    /// Unannotated path; scope flags start false.
    pub fn from_points(points: Vec<Vec2>, segment_times: Vec<f64>) -> Self {
        let n = points.len();
        let total_time = segment_times.iter().fold(0.0, |a, t| a + t);
        Self {
            segment_in_scope: vec![false; n.saturating_sub(1)],
            point_in_scope: vec![false; n],
            points,
            segment_times,
            total_time,
            visible_fraction: 0.0,
        }
    }

    pub fn start(&self) -> Vec2 {
        self.points[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.points.last().expect("path has at least one point")
    }

    pub fn segment_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm())
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().fold(0.0, |a, l| a + l)
    }

    pub fn in_scope_segments(&self) -> usize {
        self.segment_in_scope.iter().filter(|s| **s).count()
    }
}

/// Nodal gradient of `u` by central differences, one-sided where a neighbour
/// is missing or unreachable.
fn nodal_gradients(field: &ValueField) -> Vec<Vec2> {
    let g = &field.grid;
    let u = &field.values;
    let finite = |i: Option<usize>| i.filter(|&j| u[j].is_finite());
    (0..g.len())
        .map(|i| {
            if !u[i].is_finite() {
                return Vec2::zeros();
            }
            let (ix, iy) = g.coords(i);
            let (ix, iy) = (ix as i64, iy as i64);
            let diff = |lo: Option<usize>, hi: Option<usize>| match (lo, hi) {
                (Some(l), Some(r)) => (u[r] - u[l]) / (2.0 * g.h),
                (None, Some(r)) => (u[r] - u[i]) / g.h,
                (Some(l), None) => (u[i] - u[l]) / g.h,
                (None, None) => 0.0,
            };
            Vec2::new(
                diff(finite(g.checked_index(ix - 1, iy)), finite(g.checked_index(ix + 1, iy))),
                diff(finite(g.checked_index(ix, iy - 1)), finite(g.checked_index(ix, iy + 1))),
            )
        })
        .collect()
}

struct Descent<'a> {
    field: &'a ValueField,
    wind: &'a WindField,
    grad: Vec<Vec2>,
}

impl Descent<'_> {
    fn gradient(&self, p: Vec2) -> Vec2 {
        let g = &self.field.grid;
        let q = g.to_grid(p);
        let (i0, tx) = crate::windfield::cell_fraction(q.x, g.nx);
        let (j0, ty) = crate::windfield::cell_fraction(q.y, g.ny);
        let mut acc = Vec2::zeros();
        let mut wsum = 0.0;
        for (i, j, w) in [
            (i0, j0, (1.0 - tx) * (1.0 - ty)),
            (i0 + 1, j0, tx * (1.0 - ty)),
            (i0, j0 + 1, (1.0 - tx) * ty),
            (i0 + 1, j0 + 1, tx * ty),
        ] {
            let idx = g.index(i, j);
            if w > 0.0 && self.field.values[idx].is_finite() {
                acc += w * self.grad[idx];
                wsum += w;
            }
        }
        if wsum > 0.0 {
            acc / wsum
        } else {
            Vec2::zeros()
        }
    }

    /// Control speed and wind at `p`, both scaled by the local slow-down factor.
    fn medium(&self, p: Vec2) -> (f64, Vec2) {
        let s = self.field.grid.nearest_node(p).map_or(1.0, |i| self.field.speed_scale[i]);
        (s * self.field.base_speed, s * self.wind.sample(p))
    }

    fn free(&self, p: Vec2) -> bool {
        let g = &self.field.grid;
        g.contains(p) && g.nearest_node(p).is_some_and(|i| !self.field.removed[i] && self.field.values[i].is_finite())
    }

    /// Straight move with its travel time.
    fn straight(&self, p: Vec2, q: Vec2) -> f64 {
        let d = q - p;
        let len = d.norm();
        if len == 0.0 {
            return 0.0;
        }
        let (v, w) = self.medium(p);
        len / ray_speed(d / len, w, v)
    }

    /// Move toward the lowest-valued free neighbour node of the current cell.
    fn greedy_target(&self, p: Vec2) -> Option<Vec2> {
        let g = &self.field.grid;
        let (cx, cy) = g.cell_of(p);
        let here = g.checked_index(cx, cy).map_or(f64::INFINITY, |i| self.field.values[i]);
        let mut best: Option<(f64, usize)> = None;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let Some(j) = g.checked_index(cx + dx, cy + dy) else { continue };
                let v = self.field.values[j];
                if (dx, dy) == (0, 0) || self.field.removed[j] || !v.is_finite() {
                    continue;
                }
                // diagonal moves must not squeeze between two blocked cells
                if dx != 0 && dy != 0 {
                    let side_a = g.checked_index(cx + dx, cy).is_some_and(|k| !self.field.removed[k]);
                    let side_b = g.checked_index(cx, cy + dy).is_some_and(|k| !self.field.removed[k]);
                    if !(side_a && side_b) {
                        continue;
                    }
                }
                if v < here && best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, j));
                }
            }
        }
        best.map(|(_, j)| g.position(j))
    }
}

/// Forward-Euler descent along `dX/dt = -V grad u / |grad u| + W`.
///
/// Stops once within one grid spacing of the destination and then walks
/// straight in. Where a step would enter an obstacle cell the move slides
/// along the blocked axis; failing that it steps toward the lowest free
/// neighbour node.
pub fn extract_path_characteristic(field: &ValueField, wind: &WindField, start: Vec2, step: f64) -> Result<Path> {
    let h = field.grid.h;
    if !(step > 0.0 && step <= h * (1.0 + 1e-12)) {
        return Err(Error::config(format!("descent step must lie in (0, h = {h}], got {step}")));
    }
    if wind.grid != field.grid {
        return Err(Error::validation("wind field and value field use different grids"));
    }
    let dest = field.destination;
    let u0 = field.value_at(start);
    if !field.grid.contains(start) || !u0.is_finite() {
        return Err(Error::Unreachable { x: start.x, y: start.y });
    }
    let descent = Descent { field, wind, grad: nodal_gradients(field) };

    let mut points = vec![start];
    let mut times = Vec::new();
    let max_steps = (20.0 * u0.max(h) / step * field.base_speed).ceil() as usize;
    let mut p = start;
    let mut steps = 0;
    while (dest - p).norm() > h {
        if steps >= max_steps {
            return Err(Error::NonConvergence {
                steps,
                partial: Box::new(Path::from_points(points, times)),
            });
        }
        steps += 1;
        let grad = descent.gradient(p);
        let (v, w) = descent.medium(p);
        let mut next = None;
        if grad.norm() > 1e-12 {
            let flow = -v * grad / grad.norm() + w;
            let speed = flow.norm();
            let q = p + step * flow / speed;
            if descent.free(q) {
                next = Some((q, step / speed));
            } else {
                // slide along whichever axis stays free and descends further
                let mut best: Option<(f64, Vec2)> = None;
                let d = q - p;
                for s in [Vec2::new(d.x, 0.0), Vec2::new(0.0, d.y)] {
                    let c = p + s;
                    if s.norm() > 1e-12 * h && descent.free(c) {
                        let val = field.interpolate(c);
                        if best.is_none_or(|(b, _)| val < b) {
                            best = Some((val, c));
                        }
                    }
                }
                if let Some((_, c)) = best {
                    next = Some((c, descent.straight(p, c)));
                }
            }
        }
        let (q, dt) = match next {
            Some(n) => n,
            None => {
                let Some(target) = descent.greedy_target(p) else {
                    return Err(Error::NonConvergence {
                        steps,
                        partial: Box::new(Path::from_points(points, times)),
                    });
                };
                let d = target - p;
                let q = if d.norm() > step { p + step * d / d.norm() } else { target };
                (q, descent.straight(p, q))
            }
        };
        p = q;
        points.push(p);
        times.push(dt);
    }

    let rest = dest - p;
    let n_sub = (rest.norm() / step).ceil() as usize;
    for k in 1..=n_sub {
        let q = if k == n_sub { dest } else { p + rest * (k as f64 / n_sub as f64) };
        let prev = *points.last().unwrap();
        times.push(descent.straight(prev, q));
        points.push(q);
    }
    Ok(Path::from_points(points, times))
}

/// Follows the predecessor chain of a graph-search field from the node
/// containing `start` to the destination. Segment costs are the exact
/// differences of `u` along the chain.
pub fn extract_path_discrete(field: &ValueField, start: Vec2) -> Result<Path> {
    let g = &field.grid;
    let s = g
        .nearest_node(start)
        .filter(|&i| field.values[i].is_finite())
        .ok_or(Error::Unreachable { x: start.x, y: start.y })?;
    let mut nodes = vec![s];
    let mut cur = s;
    loop {
        match field.predecessor[cur] {
            Predecessor::Source => break,
            Predecessor::Edge(next) => {
                nodes.push(next);
                cur = next;
                if nodes.len() > g.len() {
                    return Err(Error::validation("predecessor chain contains a cycle"));
                }
            }
            Predecessor::Simplex(..) | Predecessor::None => {
                return Err(Error::config(
                    "value field has no single-predecessor chain; use characteristic extraction",
                ))
            }
        }
    }
    let times = nodes.windows(2).map(|w| field.values[w[0]] - field.values[w[1]]).collect();
    let mut path = Path::from_points(nodes.iter().map(|&i| g.position(i)).collect(), times);
    path.total_time = field.values[s];
    Ok(path)
}

/// Sets the per-segment and per-point scope flags and the visible fraction.
pub fn annotate_visibility(mut path: Path, cameras: &[Camera], obstacles: &ObstacleMap) -> Path {
    path.point_in_scope = path.points.iter().map(|p| in_any_scope(cameras, *p, obstacles)).collect();
    path.segment_in_scope = path
        .points
        .windows(2)
        .map(|w| in_any_scope(cameras, 0.5 * (w[0] + w[1]), obstacles))
        .collect();
    let total = path.length();
    let seen: f64 = path
        .segment_lengths()
        .zip(&path.segment_in_scope)
        .filter(|(_, s)| **s)
        .fold(0.0, |a, (l, _)| a + l);
    path.visible_fraction = if total > 0.0 { seen / total } else { 0.0 };
    path
}

/// Greedily replaces runs of out-of-scope segments with straight shortcuts that
/// cross no obstacle cell and no camera scope. The shortcut keeps the average
/// pace of the run it replaces. Returns an annotated path.
pub fn smooth_path(path: &Path, cameras: &[Camera], obstacles: &ObstacleMap) -> Path {
    let path = annotate_visibility(path.clone(), cameras, obstacles);
    let n = path.points.len();
    if n < 3 {
        return path;
    }
    let probe = 0.25 * obstacles.grid.h;
    let clear = |a: Vec2, b: Vec2| {
        if segment_touches_obstacle(obstacles, a, b) {
            return false;
        }
        let k = ((b - a).norm() / probe).ceil().max(1.0) as usize;
        (0..=k).all(|t| !in_any_scope(cameras, a + (b - a) * (t as f64 / k as f64), obstacles))
    };
    let lengths: Vec<f64> = path.segment_lengths().collect();

    let mut points = vec![path.points[0]];
    let mut times = Vec::new();
    let mut i = 0;
    while i < n - 1 {
        let mut j = i + 1;
        let mut k = i + 2;
        while k < n && !path.segment_in_scope[k - 1] && clear(path.points[i], path.points[k]) {
            j = k;
            k += 1;
        }
        if j == i + 1 || path.segment_in_scope[i] {
            times.push(path.segment_times[i]);
            points.push(path.points[i + 1]);
            i += 1;
            continue;
        }
        let run_len: f64 = lengths[i..j].iter().sum();
        let run_time: f64 = path.segment_times[i..j].iter().sum();
        let straight = (path.points[j] - path.points[i]).norm();
        times.push(if run_len > 0.0 { run_time * straight / run_len } else { 0.0 });
        points.push(path.points[j]);
        i = j;
    }
    annotate_visibility(Path::from_points(points, times), cameras, obstacles)
}
