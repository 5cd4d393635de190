use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relayout::scene::{parse_layout, parse_scene, serialize_layout, Layout, LayoutPose};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.scene.json"))
}

fn relayout(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relayout"))
        .args(args)
        .env_remove("RELAYOUT_SEED")
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8(b.to_vec()).unwrap()
}

fn error_lines(o: &Output) -> Vec<serde_json::Value> {
    text(&o.stderr)
        .lines()
        .filter_map(|l| serde_json::from_str(l).ok())
        .collect()
}

#[test]
fn solve_dining_writes_a_clean_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("layout.json");
    let o = relayout(&[
        "solve",
        fixture("dining-set").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let summary = text(&o.stdout);
    assert!(
        summary.contains("%CR 0.0") && summary.contains("%OR 0.0"),
        "{summary}"
    );
    let layout = parse_layout(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(layout.poses.len(), 5);
    // No temporary file left next to the output.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn solve_without_out_prints_the_layout() {
    let o = relayout(&[
        "solve",
        fixture("conflict").to_str().unwrap(),
        "--iterations",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(parse_layout(&text(&o.stdout)).is_ok());
    assert!(text(&o.stderr).contains("%CR"));
}

#[test]
fn seed_flag_overrides_environment() {
    let scene = fixture("mixed-10");
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_relayout"));
        c.args(["solve", scene.to_str().unwrap(), "--iterations", "40"]);
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        match env {
            Some(v) => c.env("RELAYOUT_SEED", v),
            None => c.env_remove("RELAYOUT_SEED"),
        };
        let o = c.output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        let stderr = text(&o.stderr);
        stderr
            .lines()
            .find(|l| l.starts_with("seed "))
            .unwrap()
            .to_string()
    };
    assert_eq!(run(None, None), "seed 13");
    assert_eq!(run(Some("4"), None), "seed 4");
    assert_eq!(run(Some("4"), Some("9")), "seed 9");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = relayout(&["solve", fixture("dining-set").to_str().unwrap(), "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("Usage"));
    assert_eq!(error_lines(&o)[0]["error"], "usage");
}

#[test]
fn help_succeeds() {
    let o = relayout(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["solve", "validate", "analyze", "eval", "bench"] {
        assert!(text(&o.stdout).contains(sub));
    }
}

#[test]
fn missing_file_is_exit_one() {
    let o = relayout(&["analyze", "/nonexistent/scene.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_lines(&o)[0]["error"], "io");
}

#[test]
fn malformed_scene_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"room": {"length": 3, "width": 3, "height": 2}, "assets": [{"id": "a", "size": [1, 1]}]}"#)
        .unwrap();
    let o = relayout(&["solve", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_lines(&o)[0]["error"], "scene");
}

#[test]
fn oversized_asset_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("big.json");
    std::fs::write(
        &p,
        r#"{"room": {"length": 2, "width": 2, "height": 2}, "assets": [{"id": "slab", "size": [3, 0.5, 0.5]}]}"#,
    )
    .unwrap();
    let o = relayout(&["solve", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_lines(&o)[0]["error"], "infeasible");
}

#[test]
fn eval_reports_collisions_and_succeeds() {
    let scene = fixture("conflict");
    let spec = parse_scene(&std::fs::read_to_string(&scene).unwrap()).unwrap();
    let mut layout = Layout::default();
    for a in &spec.assets {
        layout.poses.insert(
            a.id.clone(),
            LayoutPose {
                x: 2.0,
                y: 2.0,
                z: 0.0,
                theta: 0.0,
            },
        );
    }
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("layout.json");
    std::fs::write(&lp, serialize_layout(&layout)).unwrap();
    let o = relayout(&["eval", scene.to_str().unwrap(), lp.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        text(&o.stdout).starts_with("%CR 100.0"),
        "{}",
        text(&o.stdout)
    );
}

#[test]
fn eval_with_missing_pose_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("layout.json");
    std::fs::write(&lp, serialize_layout(&Layout::default())).unwrap();
    let o = relayout(&[
        "eval",
        fixture("conflict").to_str().unwrap(),
        lp.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn validate_resolves_the_conflict_scene() {
    let dir = tempfile::tempdir().unwrap();
    let revised = dir.path().join("revised.json");
    let o = relayout(&[
        "validate",
        fixture("conflict").to_str().unwrap(),
        "--out",
        revised.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o.stdout).ends_with("converged at iteration 3\n"));
    let spec = parse_scene(&std::fs::read_to_string(revised).unwrap()).unwrap();
    assert_eq!(spec.relations.len(), 5);
}

#[test]
fn validate_out_of_budget_is_exit_three() {
    let o = relayout(&[
        "validate",
        fixture("conflict").to_str().unwrap(),
        "--budget",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_lines(&o)[0]["error"], "not_converged");
}

#[test]
fn analyze_prints_cost_report() {
    let o = relayout(&["analyze", fixture("dining-set").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o.stdout).contains("delta 4"));
    let o = relayout(&["analyze", fixture("dining-set").to_str().unwrap(), "--csv"]);
    assert!(text(&o.stdout).starts_with("unit,members,anchor_depth,status,savings\n"));
}

#[test]
fn bench_writes_curves() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("curves.csv");
    let o = relayout(&[
        "bench",
        fixture("star-unit").to_str().unwrap(),
        "--seeds",
        "0,1",
        "--iterations",
        "100",
        "--curves",
        curves.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("not slower on"));
    assert_eq!(
        std::fs::read_to_string(curves).unwrap().lines().count(),
        1 + 2 * 200
    );
}

#[test]
fn bench_rejects_bad_threshold() {
    let o = relayout(&[
        "bench",
        fixture("star-unit").to_str().unwrap(),
        "--threshold",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
}
