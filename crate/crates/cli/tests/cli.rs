use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn resoline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resoline")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn well(dir: &Path) -> PathBuf {
    write(dir, "well.json", r#"{"breakpoints": [-1, 1], "values": [-4], "label": "well"}"#)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn entries(dir: &TempDir) -> usize {
    std::fs::read_dir(dir.path()).unwrap().count()
}

#[test]
fn resonances_write_a_zero_set() {
    let dir = TempDir::new().unwrap();
    let v = well(dir.path());
    let out = dir.path().join("z.json");
    let res = resoline(&["resonances", "--potential", s(&v), "--radius", "30", "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let z: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(z["function"], "xhat");
    assert_eq!(z["radius"], 30.0);
    let zeros = z["zeros"].as_array().unwrap();
    assert!(!zeros.is_empty());
    for e in zeros {
        assert!(e["im"].as_f64().unwrap() < 0.0);
        assert_eq!(e["mult"], 1);
        assert!(e["re"].as_f64().unwrap().hypot(e["im"].as_f64().unwrap()) <= 30.0);
    }
}

#[test]
fn malformed_json_exits_one_without_outputs() {
    let dir = TempDir::new().unwrap();
    let v = write(dir.path(), "bad.json", r#"{"breakpoints": [-1, 1], "values": [-4"#);
    let out = dir.path().join("z.json");
    let svg = dir.path().join("z.svg");
    let res = resoline(&["resonances", "--potential", s(&v), "--out", s(&out), "--svg", s(&svg)]);
    assert_eq!(res.status.code(), Some(1));
    assert_eq!(entries(&dir), 1);
    let report: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(report["status"], "error");
    assert_eq!(report["kind"], "input");
}

#[test]
fn unknown_keys_and_missing_files_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let v = well(dir.path());
    let cfg = write(dir.path(), "cfg.json", r#"{"radius": 10, "radious": 4}"#);
    let res = resoline(&["resonances", "--potential", s(&v), "--config", s(&cfg)]);
    assert_eq!(res.status.code(), Some(1));
    let missing = dir.path().join("nope.json");
    assert_eq!(resoline(&["bound-states", "--potential", s(&missing)]).status.code(), Some(1));
    assert_eq!(resoline(&["bound-states"]).status.code(), Some(1));
    assert_eq!(resoline(&["no-such-command"]).status.code(), Some(1));
    let bad_potential = write(dir.path(), "p.json", r#"{"breakpoints": [0.5, 1], "values": [-4]}"#);
    assert_eq!(resoline(&["bound-states", "--potential", s(&bad_potential)]).status.code(), Some(1));
}

#[test]
fn flags_override_the_config_file() {
    let dir = TempDir::new().unwrap();
    let v = well(dir.path());
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(r#"{{"command": "resonances", "potential": "{}", "radius": 5}}"#, s(&v)),
    );
    let from_file = resoline(&["resonances", "--config", s(&cfg)]);
    let flagged = resoline(&["resonances", "--config", s(&cfg), "--radius", "12"]);
    let r = |o: &Output| serde_json::from_slice::<Value>(&o.stdout).unwrap()["radius"].as_f64().unwrap();
    assert_eq!(r(&from_file), 5.0);
    assert_eq!(r(&flagged), 12.0);
    let wrong = resoline(&["bound-states", "--config", s(&cfg)]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let v = well(dir.path());
    let run = |tag: &str| {
        let files: Vec<PathBuf> =
            ["z.json", "z.csv", "z.svg"].iter().map(|n| dir.path().join(format!("{tag}{n}"))).collect();
        let res = resoline(&[
            "resonances",
            "--potential",
            s(&v),
            "--radius",
            "20",
            "--out",
            s(&files[0]),
            "--csv",
            s(&files[1]),
            "--svg",
            s(&files[2]),
        ]);
        assert_eq!(res.status.code(), Some(0));
        files.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>()
    };
    assert_eq!(run("a"), run("b"));
    let grid = |tag: &str| {
        let out = dir.path().join(format!("{tag}grid.csv"));
        let res = resoline(&[
            "scattering-grid",
            "--potential",
            s(&v),
            "--n-re",
            "9",
            "--n-im",
            "5",
            "--im-min",
            "-1",
            "--im-max",
            "1",
            "--out",
            s(&out),
        ]);
        assert_eq!(res.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    let g = grid("a");
    assert_eq!(g, grid("b"));
    let text = String::from_utf8(g).unwrap();
    assert!(text.starts_with("k_re,k_im,xhat_re,xhat_im,yhat_re,yhat_im,dets_re,dets_im,residual_U\n"));
    assert_eq!(text.lines().count(), 1 + 9 * 5);
}

#[test]
fn random_potential_is_seeded() {
    let a = resoline(&["random-potential", "--seed", "7"]);
    let b = resoline(&["random-potential", "--seed", "7"]);
    let c = resoline(&["random-potential", "--seed", "8"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn density_and_cartwright_checks_pass_on_the_square_well() {
    let dir = TempDir::new().unwrap();
    let v = well(dir.path());
    let svg = dir.path().join("d.svg");
    let res = resoline(&["cartwright-check", "--potential", s(&v), "--radius", "40", "--svg", s(&svg)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let summary: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!((summary["expected_density"].as_f64().unwrap() - 2.0 / std::f64::consts::PI).abs() < 0.01);
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn threshold_violation_exits_two_and_still_reports() {
    let dir = TempDir::new().unwrap();
    let v = well(dir.path());
    let out = dir.path().join("d.json");
    let res = resoline(&["density", "--potential", s(&v), "--radius", "10", "--tolerance", "1e-9", "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["status"], "fail");
}

#[test]
fn inverse_recover_round_trips_synthetic_data() {
    let dir = TempDir::new().unwrap();
    let truth = write(dir.path(), "truth.json", r#"{"breakpoints": [-1, -0.5, 0, 1], "values": [-1, 0.7, -2]}"#);
    let grid = dir.path().join("grid.csv");
    let res = resoline(&[
        "scattering-grid",
        "--potential",
        s(&truth),
        "--re-min",
        "0.1",
        "--re-max",
        "10",
        "--n-re",
        "34",
        "--im-min",
        "0",
        "--im-max",
        "1",
        "--n-im",
        "1",
        "--out",
        s(&grid),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let samples: Vec<String> = std::fs::read_to_string(&grid)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            format!(r#"{{"k": {}, "re": {}, "im": {}}}"#, c[0], c[6], c[7])
        })
        .collect();
    let spec = write(
        dir.path(),
        "spec.json",
        &format!(
            r#"{{"known_right": {{"breakpoints": [0, 1], "values": [-2]}}, "a": -1, "n_params": 2,
                "data": {{"det_s": [{}]}}, "loss_kind": "DetSGrid"}}"#,
            samples.join(",")
        ),
    );
    let out = dir.path().join("r.json");
    let trace = dir.path().join("trace.csv");
    let res =
        resoline(&["inverse-recover", "--spec", s(&spec), "--truth", s(&truth), "--out", s(&out), "--csv", s(&trace)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(r["l2_error_vs_truth"].as_f64().unwrap() < 1e-5, "{r}");
    assert!(std::fs::read_to_string(trace).unwrap().starts_with("iteration,loss\n"));
}

#[test]
fn distinguish_reports_identical_pairs() {
    let dir = TempDir::new().unwrap();
    let v = write(dir.path(), "v.json", r#"{"breakpoints": [-1, 0, 1], "values": [-1, -3]}"#);
    let w = write(dir.path(), "w.json", r#"{"breakpoints": [-1, 0, 1], "values": [-1.5, -3]}"#);
    let same = resoline(&["distinguish", "--potential", s(&v), "--potential2", s(&v), "--radius", "8"]);
    assert_eq!(same.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&same.stdout).unwrap();
    assert_eq!(report["report"]["distinguishability"], 0.0);
    let diff = resoline(&["distinguish", "--potential", s(&v), "--potential2", s(&w), "--radius", "8"]);
    assert_eq!(diff.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&diff.stdout).unwrap();
    assert!(report["report"]["distinguishability"].as_f64().unwrap() > 1e-7);
}

#[test]
fn kernels_and_indicator_emit_their_tables() {
    let dir = TempDir::new().unwrap();
    let v = well(dir.path());
    let (x, y) = (dir.path().join("x.csv"), dir.path().join("y.csv"));
    let res = resoline(&["kernels", "--potential", s(&v), "--ngrid", "128", "--csv", s(&x), "--csv2", s(&y)]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&x).unwrap().lines().count(), 1 + 129);
    assert!(std::fs::read_to_string(&y).unwrap().starts_with("eta,y_reg,y_leading\n"));
    let res = resoline(&["indicator", "--potential", s(&v)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    let res = resoline(&["indicator", "--potential", s(&v), "--window", "x2", "--r-max", "1280"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
}

#[test]
fn bound_states_and_nevanlinna() {
    let dir = TempDir::new().unwrap();
    let v = well(dir.path());
    let res = resoline(&["bound-states", "--potential", s(&v)]);
    let summary: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(summary["n_bound_states"], 2);
    let shallow = write(dir.path(), "s.json", r#"{"breakpoints": [-0.5, 0.5], "values": [-1]}"#);
    let res = resoline(&["nevanlinna-check", "--potential", s(&shallow)]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
}
