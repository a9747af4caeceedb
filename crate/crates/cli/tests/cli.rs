use std::path::Path;
use std::process::Command;

use caustica::examples::radial_field;
use caustica::C64;
use caustica_cli::config::{AxisSpec, GridSpec};
use caustica_cli::field::Provenance;
use caustica_cli::{read_csv, WaveField};

fn caustica(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_caustica")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn job(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_owned()
}

fn run_in(dir: &Path, cmd: &str, cfg: &str, extra: &[&str]) -> (i32, String, String) {
    let out = dir.join(format!("out_{cmd}"));
    let mut args = vec![cmd, "--config", cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    caustica(&args)
}

const RADIAL_AXIS: &str = r#"{"example": "radial", "h": [0.1],
  "grid": {"axes": [{"min": 0, "max": 0, "count": 1}, {"min": 0, "max": 0, "count": 1}, {"min": -1, "max": 1, "count": 11}]},
  "path": {"from": [-1, 1, 0.5], "to": [1, 1, 0.5]}}"#;

#[test]
fn radial_axis_csv_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), "r.json", RADIAL_AXIS);
    let (code, _, err) = run_in(dir.path(), "eval", &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let (points, values) = read_csv(&std::fs::read_to_string(dir.path().join("out_eval/field.csv")).unwrap()).unwrap();
    assert_eq!(points.len(), 11);
    for (x, u) in points.iter().zip(&values) {
        // −2 sin(|x|/h)/|x| tends to −2/h at the focus
        let exact = if x[2] == 0.0 { C64::new(-20.0, 0.0) } else { radial_field(x, 0.1).unwrap() };
        assert!((u - exact).norm() < 1e-8, "{x:?} {u} {exact}");
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let grid = GridSpec { axes: vec![AxisSpec { min: -1.0, max: 1.0, count: 3 }, AxisSpec { min: 0.1, max: 0.1, count: 1 }, AxisSpec { min: 0.0, max: 0.7, count: 2 }] };
    let points = grid.points();
    let values: Vec<C64> = (0..points.len()).map(|i| C64::new((i as f64 * 0.37).sin() / 3.0, 1e-300 * i as f64 - (i as f64).sqrt())).collect();
    let f = WaveField {
        points: points.clone(),
        values: values.clone(),
        h: 0.1,
        grid: Some(grid),
        provenance: Provenance { example: "radial".into(), representation: "new".into(), indices: vec![-1.0], max_nodes: None },
    };
    let (p2, v2) = read_csv(&f.to_csv()).unwrap();
    assert_eq!(p2, points);
    assert_eq!(v2, values);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(
        dir.path(),
        "b.json",
        r#"{"example": "beam", "amplitude": {"kind": "gaussian", "width": 1}, "h": [0.1],
            "grid": {"axes": [{"min": -0.5, "max": 0.5, "count": 9}, {"min": -0.5, "max": 0.5, "count": 7}, {"min": 0.2, "max": 0.2, "count": 1}]}}"#,
    );
    let mut csvs = Vec::new();
    for threads in ["1", "3", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        let (code, _, err) = caustica(&["eval", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert_eq!(code, 0, "{err}");
        csvs.push(std::fs::read(out.join("field.csv")).unwrap());
    }
    assert!(csvs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn beam_slice_heatmap_shows_the_first_ring() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(
        dir.path(),
        "b.json",
        r#"{"example": "beam", "amplitude": {"kind": "gaussian", "width": 1}, "h": [0.1], "compare_with": "exact",
            "grid": {"axes": [{"min": -0.6, "max": 0.6, "count": 64}, {"min": -0.6, "max": 0.6, "count": 64}, {"min": 0, "max": 0, "count": 1}]}}"#,
    );
    let (code, _, err) = run_in(dir.path(), "eval", &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out_eval");
    let pgm = std::fs::read(out.join("field.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n64 64\n255\n"));
    assert_eq!(pgm.len(), b"P5\n64 64\n255\n".len() + 64 * 64);
    let scale = std::fs::read_to_string(out.join("field.scale.txt")).unwrap();
    let (points, values) = read_csv(&std::fs::read_to_string(out.join("field.csv")).unwrap()).unwrap();
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(scale.contains(&format!("max {max:.16e}")));
    // the row nearest the axis, x₁ > 0: the first dark ring sits at the first zero of J₀(λ(0)r/h)
    let y0 = points.iter().map(|p| p[1].abs()).fold(f64::INFINITY, f64::min);
    let row: Vec<(f64, f64)> = points.iter().zip(&values).filter(|(p, _)| p[1].abs() == y0 && p[1] > 0.0 && p[0] > 0.0).map(|(p, v)| (p[0].hypot(p[1]), v.norm())).collect();
    let first_min = row.windows(3).find(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1).unwrap()[1].0;
    assert!((first_min - 2.404825557695773 * 0.1 / 2.0).abs() < 0.02, "{first_min}");
    let (_, report, _) = run_in(dir.path(), "compare", &cfg, &[]);
    let l2: f64 = report.lines().find(|l| l.contains("relative L2")).unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(l2 < 0.05, "{report}");
}

#[test]
fn single_h_sweep_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(
        dir.path(),
        "s.json",
        r#"{"example": "radial", "grid": {"axes": [{"min": 0.5, "max": 1.5, "count": 3}, {"min": 0, "max": 0, "count": 1}, {"min": 0.2, "max": 0.2, "count": 1}]}}"#,
    );
    let (code, _, err) = run_in(dir.path(), "sweep", &cfg, &["--h", "0.05"]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("out_sweep/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cols: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cols[0].parse::<f64>().unwrap(), 0.05);
    assert!(cols[4].parse::<f64>().unwrap() < 1e-8);
}

#[test]
fn radial_index_through_focus_is_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), "r.json", RADIAL_AXIS);
    let (code, stdout, err) = run_in(dir.path(), "index", &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains(": 2 (raw"));
    let csv = std::fs::read_to_string(dir.path().join("out_index/index.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("path,2,")));
}

#[test]
fn radial_check_residuals_are_small() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), "r.json", RADIAL_AXIS);
    let (code, stdout, err) = run_in(dir.path(), "check", &cfg, &[]);
    assert_eq!(code, 0, "{stdout}{err}");
    let csv = std::fs::read_to_string(dir.path().join("out_check/check.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[3], "1", "{line}");
        if !cols[0].contains("min |J^1|") {
            assert!(cols[1].parse::<f64>().unwrap() < 1e-8, "{line}");
        }
    }
}

#[test]
fn zero_amplitude_gives_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), "z.json", &RADIAL_AXIS.replace(r#""h": [0.1],"#, r#""h": [0.1], "amplitude": {"kind": "zero"},"#));
    let (code, _, err) = run_in(dir.path(), "eval", &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let (_, values) = read_csv(&std::fs::read_to_string(dir.path().join("out_eval/field.csv")).unwrap()).unwrap();
    assert!(values.iter().all(|v| *v == C64::new(0.0, 0.0)));
}

#[test]
fn identical_representations_compare_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), "c.json", &RADIAL_AXIS.replace(r#""h": [0.1],"#, r#""h": [0.1, 0.05], "representation": "new", "compare_with": "auto","#));
    let (code, stdout, err) = run_in(dir.path(), "compare", &cfg, &[]);
    assert_eq!(code, 0, "{stdout}{err}");
    assert!(stdout.contains("PASS"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for (name, json) in [
        ("syntax.json", "{\"example\": "),
        ("unknown.json", r#"{"example": "torus"}"#),
        ("h.json", r#"{"example": "radial", "h": [0.1, -0.05]}"#),
        ("rep.json", r#"{"example": "beam", "representation": "standard"}"#),
        ("grid.json", r#"{"example": "radial", "grid": {"axes": [{"min": 0, "max": 1, "count": 0}, {"min": 0, "max": 0, "count": 1}, {"min": 0, "max": 0, "count": 1}]}}"#),
        ("field.json", r#"{"example": "radial", "colour": "red"}"#),
    ] {
        let cfg = job(dir.path(), name, json);
        let (code, _, err) = run_in(dir.path(), "eval", &cfg, &[]);
        assert_eq!(code, 2, "{name}: {err}");
    }
    let (code, _, _) = caustica(&["eval", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn numerical_failure_exits_with_one_and_names_the_module() {
    // the closed form is singular at the focus
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), "r.json", RADIAL_AXIS);
    let (code, _, err) = run_in(dir.path(), "sweep", &cfg, &[]);
    assert_eq!(code, 1);
    assert!(err.contains("examples:"), "{err}");
}

#[test]
fn bridge_branches_converge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), "a.json", r#"{"example": "radial", "h": [0.1, 0.05, 0.025]}"#);
    let (code, stdout, err) = run_in(dir.path(), "bridge", &cfg, &[]);
    assert_eq!(code, 0, "{stdout}{err}");
    assert_eq!(stdout.matches("PASS").count(), 2);
}
