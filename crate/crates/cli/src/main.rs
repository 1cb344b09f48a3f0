use std::f64::consts::FRAC_PI_2;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use vigil_core::io::{self, write_atomic, SceneFile};
use vigil_core::objective::{boundary_od_pairs, score_cameras, Aggregation};
use vigil_core::pathing::annotate_visibility;
use vigil_core::placement::{anneal_chains, ObjectiveScorer};
use vigil_core::render::{render_svg, RenderOptions};
use vigil_core::solver::{ordered_upwind_on, EdgeCosts};
use vigil_core::{
    extract_path_characteristic, extract_path_discrete, smooth_path, AngleSampling, Camera, Error, GridSpec,
    ObjectiveConfig, ObstacleMap, ObstacleMode, OdPair, Path, Proposal, SAConfig, Scene, SearchSpace, SolverMode,
    SolverOptions, ValueField, Vec2, WindField, WindOptions,
};

#[derive(Parser)]
#[command(name = "vigil", version, about = "Minimum-detection paths and camera placement on a grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the value field to a destination and extract the path from a start.
    Plan(PlanArgs),
    /// Place cameras by simulated annealing.
    Place(PlaceArgs),
    /// Score the scene's cameras.
    Score(ScoreArgs),
    /// Draw a scene, its coverage and optionally a path as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Dijkstra,
    Upwind,
}

impl From<ModeArg> for SolverMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Dijkstra => SolverMode::Dijkstra,
            ModeArg::Upwind => SolverMode::Upwind,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProposalArg {
    Reset,
    Perturb,
    FullReset,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AggregationArg {
    Mean,
    Min,
}

#[derive(Clone, Copy, Debug, Serialize)]
struct GridArg {
    nx: usize,
    ny: usize,
}

impl FromStr for GridArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(['x', 'X']).ok_or("expected NXxNY, e.g. 20x20")?;
        let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Self { nx: p(a)?, ny: p(b)? })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
struct Point(f64, f64);

impl FromStr for Point {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or("expected X,Y")?;
        let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Self(p(a)?, p(b)?))
    }
}

impl From<Point> for Vec2 {
    fn from(p: Point) -> Self {
        Vec2::new(p.0, p.1)
    }
}

#[derive(Clone, Debug)]
enum OdSpec {
    File(PathBuf),
    Auto(usize),
}

impl FromStr for OdSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.strip_prefix("auto:") {
            Some(m) => m.parse().map(OdSpec::Auto).map_err(|e| format!("auto:{m}: {e}")),
            None => Ok(OdSpec::File(s.into())),
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Scene JSON file.
    #[arg(long)]
    scene: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Dijkstra)]
    mode: ModeArg,
    /// Grid resolution; defaults to unit spacing over the region.
    #[arg(long)]
    grid: Option<GridArg>,
    /// Visibility weight (wind gain in upwind mode).
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Treat obstacles as slow regions instead of removing them.
    #[arg(long)]
    slow_down: bool,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    start: Point,
    #[arg(long)]
    dest: Point,
    /// Descent step for upwind paths, at most one grid spacing.
    #[arg(long)]
    step: Option<f64>,
    /// Shortcut out-of-scope stretches of the extracted path.
    #[arg(long)]
    smooth: bool,
}

#[derive(Args, Debug)]
struct OdArgs {
    /// JSON list of {"start": [x, y], "dest": [x, y]}, or auto:M for M
    /// boundary pairs.
    #[arg(long = "od-pairs", default_value = "auto:8")]
    od_pairs: OdSpec,
    #[arg(long, value_enum, default_value_t = AggregationArg::Mean)]
    aggregation: AggregationArg,
}

#[derive(Args, Debug)]
struct PlaceArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    od: OdArgs,
    /// Number of cameras to place.
    #[arg(long, default_value_t = 1)]
    cameras: usize,
    /// Opening angle of each camera, radians.
    #[arg(long, default_value_t = FRAC_PI_2)]
    opening: f64,
    /// Search opening angles as well as positions and bearings.
    #[arg(long)]
    search_opening: bool,
    /// Number of discrete bearings; 0 samples bearings continuously.
    #[arg(long, default_value_t = 0)]
    bearings: usize,
    #[arg(long, default_value_t = Camera::DEFAULT_FALLOFF)]
    falloff: f64,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ProposalArg::Reset)]
    proposal: ProposalArg,
    #[arg(long, default_value_t = 2.0)]
    sigma_pos: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma_angle: f64,
    /// Independent chains (seeds seed, seed+1, ...); the best is kept.
    #[arg(long, default_value_t = 1)]
    chains: usize,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    od: OdArgs,
    /// Seed for auto OD pairs.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    grid: Option<GridArg>,
    /// Path JSON from `plan` to draw on top.
    #[arg(long)]
    path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OdPairDto {
    start: [f64; 2],
    dest: [f64; 2],
}

#[derive(Serialize)]
struct SaManifest {
    t0: f64,
    iterations: usize,
    n_cameras: usize,
    proposal: Proposal,
    opening: f64,
    search_opening: bool,
    bearings: usize,
    chains: usize,
    od_pairs: usize,
}

#[derive(Serialize)]
struct RunManifest {
    tool_version: &'static str,
    subcommand: &'static str,
    args: Vec<String>,
    scene: String,
    out_dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<ModeArg>,
    grid: GridSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sa: Option<SaManifest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    outputs: Vec<String>,
    duration_s: f64,
}

struct Loaded {
    file: SceneFile,
    scene: Scene,
    grid: GridSpec,
    map: ObstacleMap,
}

fn load(scene: &FsPath, grid: Option<GridArg>) -> anyhow::Result<Loaded> {
    let file = io::read_scene(scene).with_context(|| format!("reading {}", scene.display()))?;
    let scene = file.to_scene()?;
    let r = scene.region;
    let (nx, ny) = match grid {
        Some(g) => (g.nx, g.ny),
        None => (r.width().round() as usize + 1, r.height().round() as usize + 1),
    };
    let grid = GridSpec::covering(&r, nx, ny)?;
    let map = scene.discretize(&grid)?;
    Ok(Loaded { file, scene, grid, map })
}

fn solver_options(slow_down: bool) -> SolverOptions {
    SolverOptions { obstacle_mode: if slow_down { ObstacleMode::slow_down() } else { ObstacleMode::Delete } }
}

fn od_pairs(spec: &OdSpec, map: &ObstacleMap, seed: u64) -> anyhow::Result<Vec<OdPair>> {
    match spec {
        OdSpec::Auto(m) => Ok(boundary_od_pairs(map, *m, seed)),
        OdSpec::File(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let dtos: Vec<OdPairDto> =
                serde_json::from_str(&text).map_err(|e| Error::Validation(format!("OD pair file: {e}")))?;
            Ok(dtos.iter().map(|d| OdPair::new(Vec2::new(d.start[0], d.start[1]), Vec2::new(d.dest[0], d.dest[1]))).collect())
        }
    }
}

fn objective(common: &Common, od: &OdArgs, pairs: Vec<OdPair>) -> ObjectiveConfig {
    let mut cfg = ObjectiveConfig::new(common.eta, pairs).with_aggregation(match od.aggregation {
        AggregationArg::Mean => Aggregation::Mean,
        AggregationArg::Min => Aggregation::Min,
    });
    cfg.solver = solver_options(common.slow_down);
    cfg
}

/// Best-response field and path for `cameras`.
#[allow(clippy::too_many_arguments)]
fn solve_path(
    scene: &Scene,
    map: &ObstacleMap,
    cameras: &[Camera],
    mode: ModeArg,
    eta: f64,
    opts: &SolverOptions,
    start: Vec2,
    dest: Vec2,
    step: Option<f64>,
) -> anyhow::Result<(ValueField, anyhow::Result<Path>)> {
    match mode {
        ModeArg::Dijkstra => {
            let field = EdgeCosts::build(cameras, map, eta, opts.obstacle_mode)?.solve(map, dest, scene.base_speed)?;
            let path = extract_path_discrete(&field, start).map_err(Into::into);
            Ok((field, path))
        }
        ModeArg::Upwind => {
            let with_cams = Scene { cameras: cameras.to_vec(), ..scene.clone() };
            let wind = WindField::build(&with_cams, map, dest, &WindOptions { gain: eta, ..WindOptions::default() })?;
            let field = ordered_upwind_on(map, &wind, scene.base_speed, dest, opts)?;
            let step = step.unwrap_or(map.grid.h / 2.0);
            let path = extract_path_characteristic(&field, &wind, start, step).map_err(Into::into);
            Ok((field, path))
        }
    }
}

struct Outputs<'a> {
    dir: &'a FsPath,
    written: Vec<String>,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
        write_atomic(self.dir.join(name), contents.as_ref())?;
        self.written.push(name.to_string());
        Ok(())
    }
}

fn finish(mut out: Outputs, mut manifest: RunManifest, started: Instant) -> anyhow::Result<()> {
    manifest.outputs = std::mem::take(&mut out.written);
    manifest.duration_s = started.elapsed().as_secs_f64();
    out.write("manifest.json", serde_json::to_string_pretty(&manifest)?)
}

fn manifest(subcommand: &'static str, scene: &FsPath, out: &FsPath, grid: GridSpec) -> RunManifest {
    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        subcommand,
        args: std::env::args().skip(1).collect(),
        scene: scene.display().to_string(),
        out_dir: out.display().to_string(),
        mode: None,
        grid,
        eta: None,
        sa: None,
        seed: None,
        outputs: Vec::new(),
        duration_s: 0.0,
    }
}

fn plan(args: PlanArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let c = &args.common;
    let Loaded { scene, grid, map, .. } = load(&c.scene, c.grid)?;
    let opts = solver_options(c.slow_down);
    let (field, path) = solve_path(&scene, &map, &scene.cameras, c.mode, c.eta, &opts, args.start.into(), args.dest.into(), args.step)?;
    let mut out = Outputs { dir: &c.out, written: Vec::new() };
    out.write("value.pgm", io::value_field_pgm(&field))?;
    out.write("value.csv", io::value_field_csv(&field))?;
    let mut m = manifest("plan", &c.scene, &c.out, grid);
    m.mode = Some(c.mode);
    m.eta = Some(c.eta);
    let path = match path {
        Ok(p) => p,
        Err(e) => {
            finish(out, m, started)?;
            return Err(e);
        }
    };
    let mut path = annotate_visibility(path, &scene.cameras, &map);
    if args.smooth {
        path = smooth_path(&path, &scene.cameras, &map);
    }
    out.write("path.json", io::path_json(&path)?)?;
    out.write("overlay.svg", render_svg(&map, &scene.cameras, Some(&field), Some(&path), &RenderOptions::default()))?;
    eprintln!(
        "u(start) = {}, path length {:.4}, visible fraction {:.4}",
        field.value_at(args.start.into()),
        path.length(),
        path.visible_fraction
    );
    finish(out, m, started)
}

fn place(args: PlaceArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let c = &args.common;
    let Loaded { file, scene, grid, map } = load(&c.scene, c.grid)?;
    let bare = Scene { cameras: Vec::new(), ..scene };
    let pairs = od_pairs(&args.od.od_pairs, &map, args.seed)?;
    let cfg = objective(c, &args.od, pairs);
    let angles = if args.bearings == 0 { AngleSampling::Continuous } else { AngleSampling::Discrete(args.bearings) };
    let mut space = SearchSpace::new(map.clone(), args.opening, angles)?.with_falloff(args.falloff);
    if args.search_opening {
        space = space.with_opening_search();
    }
    let proposal = match args.proposal {
        ProposalArg::Reset => Proposal::Reset,
        ProposalArg::Perturb => Proposal::Perturb { sigma_pos: args.sigma_pos, sigma_angle: args.sigma_angle },
        ProposalArg::FullReset => Proposal::FullReset,
    };
    let sa = SAConfig::new(args.t0, args.iters, args.seed, args.cameras).with_proposal(proposal);
    let scorer = ObjectiveScorer { scene: &bare, obstacles: &map, config: &cfg, mode: c.mode.into() };
    let result = anneal_chains(&space, &sa, args.chains, &scorer)?;
    let report = score_cameras(&bare, &map, &result.best, &cfg, c.mode.into())?;

    let mut placed = file;
    placed.cameras = result.best.iter().map(io::CameraDto::from_camera).collect();
    let mut out = Outputs { dir: &c.out, written: Vec::new() };
    out.write("scene.json", serde_json::to_string_pretty(&placed)?)?;
    out.write("trace.csv", result.trace.to_csv())?;
    out.write("score.json", serde_json::to_string_pretty(&report)?)?;
    let first = cfg.od_pairs[0];
    let opts = solver_options(c.slow_down);
    let (field, path) = solve_path(&bare, &map, &result.best, c.mode, c.eta, &opts, first.start, first.dest, None)?;
    let path = path.ok().map(|p| annotate_visibility(p, &result.best, &map));
    out.write("overlay.svg", render_svg(&map, &result.best, Some(&field), path.as_ref(), &RenderOptions::default()))?;
    eprintln!("best score {:.6} (seed {})", result.best_score, result.seed);

    let mut m = manifest("place", &c.scene, &c.out, grid);
    m.mode = Some(c.mode);
    m.eta = Some(c.eta);
    m.seed = Some(args.seed);
    m.sa = Some(SaManifest {
        t0: args.t0,
        iterations: args.iters,
        n_cameras: args.cameras,
        proposal,
        opening: args.opening,
        search_opening: args.search_opening,
        bearings: args.bearings,
        chains: args.chains,
        od_pairs: cfg.od_pairs.len(),
    });
    finish(out, m, started)
}

fn score(args: ScoreArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let c = &args.common;
    let Loaded { scene, grid, map, .. } = load(&c.scene, c.grid)?;
    let pairs = od_pairs(&args.od.od_pairs, &map, args.seed)?;
    let cfg = objective(c, &args.od, pairs);
    let report = score_cameras(&scene, &map, &scene.cameras, &cfg, c.mode.into())?;
    let mut out = Outputs { dir: &c.out, written: Vec::new() };
    out.write("score.json", serde_json::to_string_pretty(&report)?)?;
    println!("{}", report.score);
    let mut m = manifest("score", &c.scene, &c.out, grid);
    m.mode = Some(c.mode);
    m.eta = Some(c.eta);
    m.seed = Some(args.seed);
    finish(out, m, started)
}

fn render(args: RenderArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let Loaded { scene, grid, map, .. } = load(&args.scene, args.grid)?;
    let path = match &args.path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let pts = io::parse_path(&text)?;
            if pts.is_empty() {
                bail!(Error::Validation("path file has no points".into()));
            }
            let points: Vec<Vec2> = pts.iter().map(|q| Vec2::new(q.x, q.y)).collect();
            let times = vec![0.0; points.len() - 1];
            Some(annotate_visibility(Path::from_points(points, times), &scene.cameras, &map))
        }
        None => None,
    };
    let mut out = Outputs { dir: &args.out, written: Vec::new() };
    out.write("overlay.svg", render_svg(&map, &scene.cameras, None, path.as_ref(), &RenderOptions::default()))?;
    finish(out, manifest("render", &args.scene, &args.out, grid), started)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Validation(_) | Error::Config(_) | Error::Json(_)) => 2,
        Some(Error::Unreachable { .. }) => 3,
        Some(Error::NonConvergence { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Place(a) => place(a),
        Command::Score(a) => score(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
