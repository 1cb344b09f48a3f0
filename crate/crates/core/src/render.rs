//! SVG overlays of scenes, coverage, value fields and paths.

use std::fmt::Write as _;

use crate::pathing::Path;
use crate::scene::{coverage_mask, Camera, ObstacleMap};
use crate::solver::ValueField;
use crate::Vec2;

const OBSTACLE: &str = "#d62728";
const VISIBLE: &str = "#aec7e8";
const PATH: &str = "#2ca02c";
const PATH_SEEN: &str = "#9467bd";
const CAMERA: &str = "#1f77b4";

#[derive(Clone, Debug)]
pub struct RenderOptions {
    /// Pixels per grid cell.
    pub cell_px: f64,
    pub show_coverage: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { cell_px: 12.0, show_coverage: true }
    }
}

struct Frame {
    origin: Vec2,
    h: f64,
    ny: usize,
    px: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        ((x - self.origin.x) / self.h + 0.5) * self.px
    }

    fn y(&self, y: f64) -> f64 {
        (self.ny as f64 - 0.5 - (y - self.origin.y) / self.h) * self.px
    }
}

/// Renders obstacles red, camera-visible nodes blue, path nodes green (purple
/// when seen), and camera wedges. With `field`, free nodes are shaded by value.
pub fn render_svg(
    obstacles: &ObstacleMap,
    cameras: &[Camera],
    field: Option<&ValueField>,
    path: Option<&Path>,
    opts: &RenderOptions,
) -> String {
    let g = obstacles.grid;
    let f = Frame { origin: g.origin(), h: g.h, ny: g.ny, px: opts.cell_px };
    let (w, hgt) = (g.nx as f64 * f.px, g.ny as f64 * f.px);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{hgt:.0}" viewBox="0 0 {w:.0} {hgt:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w:.0}" height="{hgt:.0}" fill="white"/>"#);

    let umax = field
        .map(|fl| fl.values.iter().copied().filter(|u| u.is_finite()).fold(0.0, f64::max))
        .unwrap_or(0.0);
    let seen = if opts.show_coverage { coverage_mask(cameras, obstacles) } else { vec![false; g.len()] };
    for (i, &visible) in seen.iter().enumerate() {
        let p = g.position(i);
        let fill = if obstacles.is_blocked(i) {
            OBSTACLE.to_string()
        } else if visible {
            VISIBLE.to_string()
        } else if let Some(fl) = field {
            let u = fl.value(i);
            if u.is_finite() && umax > 0.0 {
                let level = (255.0 * (1.0 - 0.8 * u / umax)).round() as u8;
                format!("#{level:02x}{level:02x}{level:02x}")
            } else {
                "#000000".to_string()
            }
        } else {
            continue;
        };
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            f.x(p.x) - f.px / 2.0,
            f.y(p.y) - f.px / 2.0,
            f.px,
            f.px
        );
    }

    let reach = g.h * (g.nx.max(g.ny) as f64) * 1.5;
    for c in cameras {
        let steps = ((c.alpha / 5f64.to_radians()).ceil() as usize).max(1);
        let mut pts = vec![c.position];
        for k in 0..=steps {
            let b = c.beta + c.alpha * k as f64 / steps as f64;
            pts.push(c.position + reach * Vec2::new(b.sin(), b.cos()));
        }
        let list: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", f.x(p.x), f.y(p.y))).collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{CAMERA}" fill-opacity="0.12" stroke="{CAMERA}" stroke-width="1"/>"#,
            list.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{CAMERA}"/>"#,
            f.x(c.position.x),
            f.y(c.position.y),
            f.px * 0.4
        );
    }

    if let Some(path) = path {
        let list: Vec<String> = path.points.iter().map(|p| format!("{:.2},{:.2}", f.x(p.x), f.y(p.y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{PATH}" stroke-width="2"/>"#, list.join(" "));
        for (p, seen) in path.points.iter().zip(&path.point_in_scope) {
            let colour = if *seen { PATH_SEEN } else { PATH };
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{colour}"/>"#,
                f.x(p.x),
                f.y(p.y),
                f.px * 0.2
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::pathing::{annotate_visibility, extract_path_discrete};
    use crate::scene::{Region, Scene};
    use crate::solver::{grid_dijkstra, SolverOptions};

    #[test]
    fn deterministic_and_well_formed() {
        let region = Region::new(0.0, 5.0, 0.0, 5.0).unwrap();
        let g = GridSpec::covering(&region, 6, 6).unwrap();
        let cam = Camera::new(Vec2::new(0.0, 0.0), 0.0, 1.0).unwrap();
        let scene = Scene::new(region, 1.0).unwrap().with_camera(cam);
        let map = scene.discretize(&g).unwrap();
        let field = grid_dijkstra(&scene, &g, Vec2::new(5.0, 5.0), 1.0, &SolverOptions::default()).unwrap();
        let path = annotate_visibility(extract_path_discrete(&field, Vec2::zeros()).unwrap(), &[cam], &map);
        let a = render_svg(&map, &[cam], Some(&field), Some(&path), &RenderOptions::default());
        let b = render_svg(&map, &[cam], Some(&field), Some(&path), &RenderOptions::default());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert!(a.contains(PATH_SEEN));
        assert_eq!(a.matches("<polygon").count(), 1);
    }

    #[test]
    fn y_axis_points_up() {
        let f = Frame { origin: Vec2::zeros(), h: 1.0, ny: 4, px: 10.0 };
        assert!(f.y(3.0) < f.y(0.0));
        assert_eq!(f.y(3.0), 5.0);
        assert_eq!(f.x(0.0), 5.0);
    }
}
