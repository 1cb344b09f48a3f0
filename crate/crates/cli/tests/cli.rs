use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn scenes() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenes")
}

fn vigil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vigil")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_scene(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn score_of(o: &Output) -> f64 {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8_lossy(&o.stdout).trim().parse().unwrap()
}

#[test]
fn plan_writes_all_outputs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("plan");
    let scene = scenes().join("tradeoff20.json");
    let o = vigil(&["plan", "--scene", s(&scene), "--out", s(&out), "--start", "0,0", "--dest", "19,19"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["value.pgm", "value.csv", "path.json", "overlay.svg", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let path: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("path.json")).unwrap()).unwrap();
    let pts = path.as_array().unwrap();
    assert_eq!(pts[0]["x"], 0.0);
    assert_eq!(pts.last().unwrap()["y"], 19.0);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "plan");
    assert!(fs::read_to_string(out.join("value.pgm")).unwrap().starts_with("P2"));
}

#[test]
fn upwind_plan_runs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("up");
    let scene = scenes().join("tradeoff20.json");
    let o = vigil(&[
        "plan", "--scene", s(&scene), "--out", s(&out), "--mode", "upwind", "--start", "0,0", "--dest", "19,19", "--step",
        "0.5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("path.json").is_file());
}

#[test]
fn overlay_shows_every_layer() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let scene = scenes().join("tradeoff20.json");
    let o = vigil(&["plan", "--scene", s(&scene), "--out", s(&out), "--start", "0,0", "--dest", "19,19", "--eta", "0.1"]);
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(out.join("overlay.svg")).unwrap();
    // obstacles, scope, path, camera
    for colour in ["#d62728", "#aec7e8", "#2ca02c", "#1f77b4"] {
        assert!(svg.contains(colour), "{colour} missing");
    }
}

#[test]
fn invalid_input_exits_2() {
    let tmp = TempDir::new().unwrap();
    let scene = scenes().join("empty20.json");
    let off = vigil(&["plan", "--scene", s(&scene), "--out", s(tmp.path()), "--start", "0,0", "--dest", "40,3"]);
    assert_eq!(code(&off), 2);
    let bad = write_scene(tmp.path(), "bad.json", r#"{"region": {"x_min": 0, "x_max": 5, "y_min": 0, "y_max": 5}, "grid": 3}"#);
    let o = vigil(&["score", "--scene", s(&bad), "--out", s(tmp.path())]);
    assert_eq!(code(&o), 2);
    let o = vigil(&["score", "--scene", s(&scene), "--out", s(tmp.path()), "--eta", "-1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn walled_off_destination_exits_3() {
    let tmp = TempDir::new().unwrap();
    let scene = write_scene(
        tmp.path(),
        "wall.json",
        r#"{"region": {"x_min": 0, "x_max": 9, "y_min": 0, "y_max": 9},
            "obstacles": [{"type": "rect", "x_min": 4, "x_max": 5, "y_min": 0, "y_max": 9}]}"#,
    );
    let out = tmp.path().join("w");
    let o = vigil(&["plan", "--scene", s(&scene), "--out", s(&out), "--start", "0,0", "--dest", "9,9"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn place_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let scene = scenes().join("placement10.json");
    let pairs = scenes().join("corner_pair10.json");
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        let o = vigil(&[
            "place", "--scene", s(&scene), "--out", s(&out), "--od-pairs", s(&pairs), "--bearings", "8", "--iters", "300",
            "--seed", "7",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["scene.json", "trace.csv", "score.json", "overlay.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert!(trace.starts_with("k,T,score_proposed,accepted,score_best"));
    assert_eq!(trace.lines().count(), 301);
    let placed: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("scene.json")).unwrap()).unwrap();
    assert_eq!(placed["cameras"].as_array().unwrap().len(), 1);
}

#[test]
fn plan_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let scene = scenes().join("tradeoff20.json");
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        let o = vigil(&["plan", "--scene", s(&scene), "--out", s(&out), "--mode", "upwind", "--start", "2,0", "--dest", "18,17"]);
        assert_eq!(code(&o), 0);
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["value.pgm", "value.csv", "path.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn zero_eta_score_ignores_cameras() {
    let tmp = TempDir::new().unwrap();
    let pairs = scenes().join("corner_pair10.json");
    let with = write_scene(
        tmp.path(),
        "with.json",
        r#"{"region": {"x_min": 0, "x_max": 9, "y_min": 0, "y_max": 9},
            "cameras": [{"x": 4, "y": 4, "beta": 0, "alpha": 6.2}]}"#,
    );
    let without = write_scene(tmp.path(), "without.json", r#"{"region": {"x_min": 0, "x_max": 9, "y_min": 0, "y_max": 9}}"#);
    for mode in ["dijkstra", "upwind"] {
        let a = vigil(&["score", "--scene", s(&with), "--out", s(&tmp.path().join("a")), "--od-pairs", s(&pairs), "--eta", "0", "--mode", mode]);
        let b = vigil(&["score", "--scene", s(&without), "--out", s(&tmp.path().join("b")), "--od-pairs", s(&pairs), "--eta", "0", "--mode", mode]);
        assert_eq!(score_of(&a), score_of(&b), "{mode}");
    }
}

#[test]
fn duplicate_camera_scores_the_same() {
    let tmp = TempDir::new().unwrap();
    let pairs = scenes().join("corner_pair10.json");
    let cam = r#"{"x": 4, "y": 4, "beta": 3.9, "alpha": 1.5}"#;
    let one = write_scene(
        tmp.path(),
        "one.json",
        &format!(r#"{{"region": {{"x_min": 0, "x_max": 9, "y_min": 0, "y_max": 9}}, "cameras": [{cam}]}}"#),
    );
    let two = write_scene(
        tmp.path(),
        "two.json",
        &format!(r#"{{"region": {{"x_min": 0, "x_max": 9, "y_min": 0, "y_max": 9}}, "cameras": [{cam}, {cam}]}}"#),
    );
    let a = vigil(&["score", "--scene", s(&one), "--out", s(&tmp.path().join("a")), "--od-pairs", s(&pairs)]);
    let b = vigil(&["score", "--scene", s(&two), "--out", s(&tmp.path().join("b")), "--od-pairs", s(&pairs)]);
    let (a, b) = (score_of(&a), score_of(&b));
    assert_eq!(a, b);
    assert!(a > 1.0);
}

#[test]
fn placing_no_cameras_returns_the_baseline() {
    let tmp = TempDir::new().unwrap();
    let scene = scenes().join("placement10.json");
    let pairs = scenes().join("corner_pair10.json");
    let out = tmp.path().join("p");
    let o = vigil(&[
        "place", "--scene", s(&scene), "--out", s(&out), "--od-pairs", s(&pairs), "--cameras", "0", "--iters", "5",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let base = vigil(&["score", "--scene", s(&scene), "--out", s(&tmp.path().join("s")), "--od-pairs", s(&pairs)]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("score.json")).unwrap()).unwrap();
    assert_eq!(report["score"].as_f64().unwrap(), score_of(&base));
}

#[test]
fn render_draws_a_saved_path() {
    let tmp = TempDir::new().unwrap();
    let scene = scenes().join("tradeoff20.json");
    let plan = tmp.path().join("plan");
    assert_eq!(code(&vigil(&["plan", "--scene", s(&scene), "--out", s(&plan), "--start", "0,0", "--dest", "19,19"])), 0);
    let out = tmp.path().join("r");
    let o = vigil(&["render", "--scene", s(&scene), "--out", s(&out), "--path", s(&plan.join("path.json"))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(out.join("overlay.svg")).unwrap();
    assert!(svg.contains("#2ca02c"));
}
