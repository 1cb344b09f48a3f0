//! File formats: scene JSON, value-field PGM/CSV, path JSON.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathing::Path;
use crate::scene::{Camera, ObstacleShape, Region, Scene};
use crate::solver::ValueField;
use crate::Vec2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDto {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleDto {
    Rect { x_min: f64, x_max: f64, y_min: f64, y_max: f64 },
    Cells { cells: Vec<[f64; 2]> },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraDto {
    pub x: f64,
    pub y: f64,
    pub beta: f64,
    pub alpha: f64,
    #[serde(default = "default_falloff")]
    pub falloff_exponent: f64,
}

fn default_falloff() -> f64 {
    Camera::DEFAULT_FALLOFF
}

fn default_speed() -> f64 {
    1.0
}

/// On-disk scene description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub region: RegionDto,
    #[serde(default = "default_speed")]
    pub base_speed: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleDto>,
    #[serde(default)]
    pub cameras: Vec<CameraDto>,
}

fn v(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

impl CameraDto {
    pub fn to_camera(&self) -> Result<Camera> {
        Camera::with_falloff(Vec2::new(self.x, self.y), self.beta, self.alpha, self.falloff_exponent)
    }

    pub fn from_camera(c: &Camera) -> Self {
        Self { x: c.position.x, y: c.position.y, beta: c.beta, alpha: c.alpha, falloff_exponent: c.falloff }
    }
}

impl SceneFile {
    pub fn to_scene(&self) -> Result<Scene> {
        let r = &self.region;
        let mut scene = Scene::new(Region::new(r.x_min, r.x_max, r.y_min, r.y_max)?, self.base_speed)?;
        for o in &self.obstacles {
            scene = scene.with_obstacle(match o {
                ObstacleDto::Rect { x_min, x_max, y_min, y_max } => {
                    ObstacleShape::Rect { x_min: *x_min, x_max: *x_max, y_min: *y_min, y_max: *y_max }
                }
                ObstacleDto::Cells { cells } => ObstacleShape::Cells(cells.iter().copied().map(v).collect()),
                ObstacleDto::Polygon { vertices } => ObstacleShape::Polygon(vertices.iter().copied().map(v).collect()),
            });
        }
        for c in &self.cameras {
            scene = scene.with_camera(c.to_camera()?);
        }
        scene.validate()?;
        Ok(scene)
    }

    pub fn from_scene(scene: &Scene) -> Self {
        let r = scene.region;
        let pts = |ps: &[Vec2]| ps.iter().map(|p| [p.x, p.y]).collect();
        Self {
            region: RegionDto { x_min: r.x_min, x_max: r.x_max, y_min: r.y_min, y_max: r.y_max },
            base_speed: scene.base_speed,
            obstacles: scene
                .obstacles
                .iter()
                .map(|o| match o {
                    ObstacleShape::Rect { x_min, x_max, y_min, y_max } => {
                        ObstacleDto::Rect { x_min: *x_min, x_max: *x_max, y_min: *y_min, y_max: *y_max }
                    }
                    ObstacleShape::Cells(c) => ObstacleDto::Cells { cells: pts(c) },
                    ObstacleShape::Polygon(p) => ObstacleDto::Polygon { vertices: pts(p) },
                })
                .collect(),
            cameras: scene.cameras.iter().map(CameraDto::from_camera).collect(),
        }
    }
}

pub fn parse_scene(json: &str) -> Result<SceneFile> {
    serde_json::from_str(json).map_err(|e| Error::Validation(format!("scene file: {e}")))
}

pub fn read_scene(path: impl AsRef<FsPath>) -> Result<SceneFile> {
    parse_scene(&fs::read_to_string(path)?)
}

pub fn read_cameras(path: impl AsRef<FsPath>) -> Result<Vec<Camera>> {
    let dtos: Vec<CameraDto> =
        serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Validation(format!("camera file: {e}")))?;
    dtos.iter().map(CameraDto::to_camera).collect()
}

pub fn cameras_json(cameras: &[Camera]) -> Result<String> {
    let dtos: Vec<CameraDto> = cameras.iter().map(CameraDto::from_camera).collect();
    Ok(serde_json::to_string_pretty(&dtos)?)
}

/// Writes through a sibling temp file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: impl AsRef<FsPath>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(FsPath::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Plain PGM (P2), top row is the largest `y`. Finite values map linearly
/// onto `1..=65535`; unreachable nodes are 0.
pub fn value_field_pgm(field: &ValueField) -> String {
    const MAXVAL: f64 = 65535.0;
    let g = field.grid;
    let vmax = field.values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let mut out = format!("P2\n# u_max {vmax}\n{} {}\n{}\n", g.nx, g.ny, MAXVAL as u32);
    for iy in (0..g.ny).rev() {
        let row: Vec<String> = (0..g.nx)
            .map(|ix| {
                let u = field.value(g.index(ix, iy));
                let level = if !u.is_finite() {
                    0.0
                } else if vmax > 0.0 {
                    1.0 + (u / vmax * (MAXVAL - 1.0)).round()
                } else {
                    1.0
                };
                (level as u32).to_string()
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// `ix,iy,u` per node, row-major; unreachable nodes print `inf`.
pub fn value_field_csv(field: &ValueField) -> String {
    let g = field.grid;
    let mut out = String::from("ix,iy,u\n");
    for i in 0..g.len() {
        let (ix, iy) = g.coords(i);
        let _ = writeln!(out, "{ix},{iy},{}", field.value(i));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathPointDto {
    pub x: f64,
    pub y: f64,
    pub in_scope: bool,
}

/// Path as a JSON array of `{x, y, in_scope}`.
pub fn path_json(path: &Path) -> Result<String> {
    let points: Vec<PathPointDto> = path
        .points
        .iter()
        .zip(&path.point_in_scope)
        .map(|(p, s)| PathPointDto { x: p.x, y: p.y, in_scope: *s })
        .collect();
    Ok(serde_json::to_string_pretty(&points)?)
}

pub fn parse_path(json: &str) -> Result<Vec<PathPointDto>> {
    Ok(serde_json::from_str(json)?)
}
