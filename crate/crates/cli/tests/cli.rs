use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn yamabe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yamabe"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = yamabe(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ok_text(args: &[&str]) -> String {
    let out = yamabe(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn curvature_of_berger_1_3() {
    let v = ok_json(&["curvature", "--s", "1", "--t", "3"]);
    assert!((f(&v["scalar"]) - 2.0).abs() < 1e-10);
    assert!(f(&v["closed_form"]["scalar_delta"]) < 1e-10);
    assert!(f(&v["closed_form"]["ricci_delta"]) < 1e-10);
}

#[test]
fn curvature_of_round_is_einstein() {
    let v = ok_json(&["curvature", "--s", "1", "--t", "1"]);
    assert!((f(&v["scalar"]) - 6.0).abs() < 1e-10);
    assert!(f(&v["einstein_deviation"]) < 1e-10);
}

#[test]
fn curvature_from_frame_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("su2.json");
    std::fs::write(
        &path,
        r#"{
            "structure_constants": [
                [[0,0,0],[0,0,2],[0,-2,0]],
                [[0,0,-2],[0,0,0],[2,0,0]],
                [[0,2,0],[-2,0,0],[0,0,0]]
            ],
            "metric": [[1,0,0],[0,2,0],[0,0,4]],
            "labels": ["X1", "X2", "X3"]
        }"#,
    )
    .unwrap();
    let v = ok_json(&["curvature", "--spec", path.to_str().unwrap()]);
    // (2/st)(2(s+t+st) - (1+s²+t²)) at (2, 4)
    assert!((f(&v["scalar"]) - 0.25 * (2.0 * 14.0 - 21.0)).abs() < 1e-10);
    assert!(v["closed_form"].is_null());
}

#[test]
fn invalid_specs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("missing.json", r#"{"berger": {"s": 1}}"#, "t"),
        ("unknown.json", r#"{"berger": {"s": 1, "t": 2, "u": 3}}"#, "u"),
        ("order.json", r#"{"berger": {"s": 3, "t": 1}}"#, "s <= t"),
        ("garbage.json", "not json", "JSON"),
        (
            "jacobi.json",
            r#"{"structure_constants": [[[0,1,0],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]],[[0,0,0],[0,0,0],[0,0,0]]],
                "metric": [[1,0,0],[0,1,0],[0,0,1]]}"#,
            "antisymmetr",
        ),
        (
            "indefinite.json",
            r#"{"structure_constants": [[[0,0,0],[0,0,2],[0,-2,0]],[[0,0,-2],[0,0,0],[2,0,0]],[[0,2,0],[-2,0,0],[0,0,0]]],
                "metric": [[1,0,0],[0,-1,0],[0,0,1]]}"#,
            "positive",
        ),
    ];
    for (name, body, needle) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        let out = yamabe(&["curvature", "--spec", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
}

#[test]
fn sweep_counts_rows() {
    let text = ok_text(&["sweep", "--s", "1:4:4", "--t", "1:8:8"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,t,R,einstein_dev,min_eig,gamma,verdict"));
    assert_eq!(lines.count(), 32);
}

#[test]
fn sweep_transitions_at_s_equal_1() {
    let text = ok_text(&["sweep", "--s", "1:1:1", "--t", "1:5:401"]);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<(f64, String)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[1].parse().unwrap(), r[6].to_string())
        })
        .collect();
    assert_eq!(rows.len(), 401);
    let step = 4.0 / 400.0;
    let changes: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| w[1].0)
        .collect();
    // Einstein at t = 1, then strict/boundary near 3 and the sign change at 4
    let near = |x: f64| changes.iter().any(|c| (c - x).abs() <= step + 1e-12);
    assert!(near(3.0), "{changes:?}");
    assert!(near(4.0), "{changes:?}");
    let at = |t: f64| &rows.iter().find(|r| (r.0 - t).abs() < 1e-12).unwrap().1;
    assert_eq!(at(2.0), "PositiveScalarUnresolved");
    assert_eq!(at(3.5), "Theorem1Strict");
    assert_eq!(at(4.5), "AutoYamabeNonpositive");
}

#[test]
fn malformed_ranges_exit_2() {
    for bad in [["1:4:4", "4:1:3"], ["1:4", "1:2:2"], ["0.5:1:2", "1:2:2"]] {
        let out = yamabe(&["sweep", "--s", bad[0], "--t", bad[1]]);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn criterion_round_against_berger_1_3() {
    let v = ok_json(&["criterion", "--g", "round", "--h", "berger:1,3"]);
    assert_eq!(v["verdict"], "AppliesBoundary");
    assert!((f(&v["gamma"]) - 3f64.sqrt()).abs() < 1e-12);
    assert!(f(&v["min_eig"]).abs() < 1e-10);
    let v = ok_json(&["criterion", "--g", "round", "--h", "berger:1,3.5"]);
    assert_eq!(v["verdict"], "AppliesStrict");
    assert!((f(&v["min_eig"]) - 2.5).abs() < 1e-10);
}

#[test]
fn pathcheck_reaches_the_sign_change() {
    let v = ok_json(&["pathcheck", "--s", "1", "--t-start", "3", "--t-end", "4", "--steps", "100"]);
    assert!((f(&v["delta"]) - 1.0).abs() < 1e-12);
    assert!(f(&v["endpoint_scalar"]).abs() < 1e-10);
    assert_eq!(v["samples"].as_array().unwrap().len(), 101);
}

#[test]
fn pathcheck_rejects_positive_endpoint() {
    let out = yamabe(&["pathcheck", "--s", "1", "--t-start", "3", "--t-end", "3.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn yamabe_round_hemisphere_matches_energy() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("minimizer.csv");
    let v = ok_json(&[
        "yamabe",
        "--geometry",
        "round-hemisphere",
        "--resolution",
        "32",
        "--seed",
        "7",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    let target = 6.0 * (std::f64::consts::PI.powi(2)).powf(2.0 / 3.0);
    let value = f(&v["value"]);
    assert!((value - target).abs() < 0.05 * target, "{value} vs {target}");
    let trace: Vec<f64> = v["trace"].as_array().unwrap().iter().map(f).collect();
    assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(std::fs::read_to_string(&dump).unwrap().lines().count(), 1 + 32 * 32 * 32);
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let dump = dir.path().join(format!("{name}.dump.json"));
        let o = yamabe(&[
            "yamabe",
            "--geometry",
            "berger:1,2",
            "--resolution",
            "8",
            "--max-iters",
            "40",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
            "--dump",
            dump.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        (read(&out), read(&dump))
    };
    let a = run("a", "5");
    let b = run("b", "5");
    assert_eq!(a, b);
    let c = run("c", "6");
    assert_ne!(a.0, c.0);
}

#[test]
fn bad_estimator_options_exit_2() {
    for extra in [["--tol", "0"], ["--restarts", "0"], ["--resolution", "3"]] {
        let mut args = vec!["yamabe", "--geometry", "round-hemisphere"];
        args.extend(extra);
        assert_eq!(yamabe(&args).status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn dump_grid_formats() {
    let csv = ok_text(&["dump-grid", "--geometry", "berger:1,3", "--resolution", "4,5,6"]);
    assert_eq!(csv.lines().count(), 1 + 120);
    let v = ok_json(&["dump-grid", "--resolution", "4", "--format", "json"]);
    assert_eq!(v["cells"].as_array().unwrap().len(), 64);
}
