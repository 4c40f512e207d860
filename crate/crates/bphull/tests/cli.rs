use std::path::Path;
use std::process::{Command, Output};

use bphull_core::formulas::{extinction_cdf, CsbpParams};

fn bphull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bphull"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exact_values() {
    let o = bphull(&["exact", "boundary-laplace", "--r", "1", "--lambda", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "1");

    let o = bphull(&["exact", "hull-laplace", "--r", "1", "--mu", "0.5"]);
    assert_eq!(code(&o), 0);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.8743717).abs() < 1e-7, "{v}");

    let o = bphull(&["exact", "xi-laplace", "--beta", "2"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 3.0 * (-2.0f64).exp()).abs() < 1e-14);
}

#[test]
fn domain_and_usage_errors_exit_2() {
    let o = bphull(&["exact", "boundary-laplace", "--r", "-1", "--lambda", "1"]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
    assert_eq!(code(&bphull(&["exact", "hull-laplace", "--r", "1"])), 2);
    assert_eq!(code(&bphull(&["exact", "no-such-formula"])), 2);
    assert_eq!(code(&bphull(&["simulate", "csbp", "--dt", "-1"])), 2);
}

#[test]
fn unwritable_output_exits_3() {
    let o = bphull(&[
        "simulate",
        "quad",
        "--faces",
        "50",
        "--kmax",
        "2",
        "--out",
        "/nonexistent-dir/q.csv",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn hull_export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = bphull(&[
            "simulate",
            "hull",
            "--rmax",
            "1",
            "--n",
            "100",
            "--seed",
            "7",
            "--out",
            path_str(p),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("replicate,r,Z_r,V_r\n"));
    assert_eq!(text.lines().count(), 1 + 100 * 100);
    assert!(!text.contains('\r'));
}

#[test]
fn quad_series_has_one_row_per_radius() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("series.csv");
    let edges = dir.path().join("edges.csv");
    let o = bphull(&[
        "simulate",
        "quad",
        "--faces",
        "1000",
        "--kmax",
        "10",
        "--seed",
        "1",
        "--out",
        path_str(&out),
        "--edges-out",
        path_str(&edges),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("k,ball_faces,hull_faces,hull_vertices,boundary_edges")
    );
    assert_eq!(lines.count(), 10);
    assert_eq!(
        std::fs::read_to_string(&edges).unwrap().lines().count(),
        1 + 2000
    );
}

/// Paths stop at extinction with value 0; the extinct fraction by the horizon
/// matches the extinction law.
#[test]
fn csbp_export_absorbs_at_zero() {
    let runs = 300;
    let mut extinct = 0;
    for seed in 0..runs {
        let o = bphull(&[
            "simulate",
            "csbp",
            "--x0",
            "1",
            "--horizon",
            "2",
            "--dt",
            "1e-4",
            "--seed",
            &seed.to_string(),
        ]);
        assert_eq!(code(&o), 0);
        let text = stdout(&o);
        let last = text.lines().last().unwrap();
        let (t, v) = last.split_once(',').unwrap();
        let (t, v): (f64, f64) = (t.parse().unwrap(), v.parse().unwrap());
        if t < 2.0 {
            assert_eq!(v, 0.0, "seed {seed}");
            extinct += 1;
        } else {
            assert_eq!(t, 2.0);
        }
    }
    let p = extinction_cdf(1.0, 2.0, CsbpParams::canonical()).unwrap();
    let se = (p * (1.0 - p) / runs as f64).sqrt();
    let frac = extinct as f64 / runs as f64;
    assert!(
        (frac - p).abs() < 4.0 * se,
        "extinct fraction {frac}, law {p}"
    );
}

#[test]
fn json_exports_parse() {
    let o = bphull(&[
        "simulate", "boundary", "--rmax", "0.5", "--seed", "2", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["times"].as_array().is_some_and(|t| !t.is_empty()));
    assert_eq!(v["meta"]["seed"], 2);

    let o = bphull(&[
        "simulate",
        "bm-functional",
        "--n",
        "200",
        "--dt",
        "1e-2",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["estimate"]["n"], 200);
    assert_eq!(v["target"], 0.125);
}

#[test]
fn effective_config_is_echoed() {
    let o = bphull(&["simulate", "bm-functional", "--n", "100", "--dt", "1e-2"]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("--seed 20240601"), "{err}");
    assert!(err.contains("--dt 0.01"));
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = bphull(&[
        "verify",
        "analytic-identities",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let json = std::fs::read_to_string(dir.path().join("analytic-identities.report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["pass"], true);
    assert!(dir.path().join("analytic-identities.report.csv").exists());
}

#[test]
fn failing_suite_exits_1_and_still_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    // A band of 1e-4 standard errors rejects any honest estimate.
    let o = bphull(&[
        "verify",
        "xi-sampler",
        "--n",
        "1000",
        "--sigmas",
        "1e-4",
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let json = std::fs::read_to_string(dir.path().join("xi-sampler.report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn verify_unknown_suite_exits_2() {
    assert_eq!(code(&bphull(&["verify", "no-such-suite"])), 2);
    let o = bphull(&["verify", "--list"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 12);
}
