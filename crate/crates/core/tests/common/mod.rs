//! Independent oracles and scene generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vigil_core::{Camera, GridSpec, ObstacleMap, ObstacleShape, Region, Scene, Vec2};

/// Slack added to every closed obstacle square.
pub const SQUARE_EPS: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-spaced region `[0, nx-1] x [0, ny-1]` with its grid.
pub fn unit_region(nx: usize, ny: usize) -> (Region, GridSpec) {
    let region = Region::new(0.0, (nx - 1) as f64, 0.0, (ny - 1) as f64).unwrap();
    (region, GridSpec::covering(&region, nx, ny).unwrap())
}

/// Whether segment `a -> b` meets the axis-aligned box `[lo, hi]` (slab test).
pub fn segment_hits_box(a: Vec2, b: Vec2, lo: Vec2, hi: Vec2) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        if d[k] == 0.0 {
            if a[k] < lo[k] || a[k] > hi[k] {
                return false;
            }
        } else {
            let (mut ta, mut tb) = ((lo[k] - a[k]) / d[k], (hi[k] - a[k]) / d[k]);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Brute force: the camera sees `p` when the bearing falls in its wedge and
/// no blocked cell other than the two endpoint cells meets the segment.
pub fn oracle_visible(cam: &Camera, p: Vec2, map: &ObstacleMap) -> bool {
    let g = &map.grid;
    if (p - cam.position).norm() == 0.0 {
        return true;
    }
    let d = p - cam.position;
    let bearing = d.x.atan2(d.y).rem_euclid(TAU);
    let offset = (bearing - cam.beta).rem_euclid(TAU);
    let in_wedge = offset <= cam.alpha + 1e-9 || offset >= TAU - 1e-9;
    if !in_wedge {
        return false;
    }
    let own = [g.nearest_node(cam.position), g.nearest_node(p)];
    for i in 0..g.len() {
        if !map.is_blocked(i) || own.contains(&Some(i)) {
            continue;
        }
        let c = g.position(i);
        let r = g.h / 2.0 + SQUARE_EPS;
        if segment_hits_box(cam.position, p, c - Vec2::new(r, r), c + Vec2::new(r, r)) {
            return false;
        }
    }
    true
}

pub fn oracle_covered(cams: &[Camera], p: Vec2, map: &ObstacleMap) -> bool {
    cams.iter().any(|c| oracle_visible(c, p, map))
}

/// All-pairs shortest paths on a dense weight matrix.
pub fn floyd_warshall(w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = w.len();
    let mut d = w.to_vec();
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let v = dik + d[k][j];
                if v < d[i][j] {
                    d[i][j] = v;
                }
            }
        }
    }
    d
}

/// Dense 4-neighbour weights `h (1 + eta [midpoint seen])` between free
/// nodes, computed from the brute-force visibility oracle.
pub fn oracle_weights(cams: &[Camera], map: &ObstacleMap, eta: f64) -> Vec<Vec<f64>> {
    let g = &map.grid;
    let n = g.len();
    let mut w = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        let (x, y) = g.coords(i);
        for (dx, dy) in [(1i64, 0i64), (0, 1)] {
            let (jx, jy) = (x as i64 + dx, y as i64 + dy);
            if jx >= g.nx as i64 || jy >= g.ny as i64 {
                continue;
            }
            let j = g.index(jx as usize, jy as usize);
            if map.is_blocked(i) || map.is_blocked(j) {
                continue;
            }
            let mid = 0.5 * (g.position(i) + g.position(j));
            let c = g.h * (1.0 + if oracle_covered(cams, mid, map) { eta } else { 0.0 });
            w[i][j] = c;
            w[j][i] = c;
        }
    }
    w
}

pub struct RandomScene {
    pub scene: Scene,
    pub grid: GridSpec,
    pub map: ObstacleMap,
    pub eta: f64,
    pub destination: Vec2,
}

/// Random grid scene: `3..=max_n` nodes per side, up to 30% blocked cells,
/// `0..=max_cams` cameras on free nodes, `eta` in `[0, 5]`.
pub fn random_scene(rng: &mut impl Rng, max_n: usize, max_cams: usize) -> RandomScene {
    loop {
        let nx = rng.random_range(3..=max_n);
        let ny = rng.random_range(3..=max_n);
        let (region, grid) = unit_region(nx, ny);
        let density = rng.random_range(0.0..0.3);
        let cells: Vec<Vec2> = (0..grid.len())
            .filter(|_| rng.random_bool(density))
            .map(|i| grid.position(i))
            .collect();
        let mut scene = Scene::new(region, 1.0).unwrap();
        if !cells.is_empty() {
            scene = scene.with_obstacle(ObstacleShape::Cells(cells));
        }
        let bare = scene.discretize(&grid).unwrap();
        let free = bare.free_nodes();
        if free.len() < 2 {
            continue;
        }
        for _ in 0..rng.random_range(0..=max_cams) {
            let at = grid.position(free[rng.random_range(0..free.len())]);
            let cam = Camera::new(at, rng.random_range(0.0..TAU), rng.random_range(0.05..=TAU)).unwrap();
            scene = scene.with_camera(cam);
        }
        let destination = grid.position(free[rng.random_range(0..free.len())]);
        let eta = rng.random_range(0.0..=5.0);
        return RandomScene { map: bare, scene, grid, eta, destination };
    }
}

/// Camera-free scene with a few random rectangles on an `n x n` unit grid.
pub fn random_rect_scene(rng: &mut impl Rng, n: usize, rects: usize) -> (Scene, GridSpec, ObstacleMap) {
    let (region, grid) = unit_region(n, n);
    let mut scene = Scene::new(region, 1.0).unwrap();
    let top = (n - 1) as f64;
    for _ in 0..rects {
        let w = rng.random_range(1.0..top / 4.0);
        let h = rng.random_range(1.0..top / 4.0);
        let x = rng.random_range(0.0..top - w);
        let y = rng.random_range(0.0..top - h);
        scene = scene.with_obstacle(ObstacleShape::Rect { x_min: x, x_max: x + w, y_min: y, y_max: y + h });
    }
    let map = scene.discretize(&grid).unwrap();
    (scene, grid, map)
}

/// Random element of `items`.
pub fn pick<T: Copy>(rng: &mut impl Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}
