use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn martinet(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_martinet"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn run_ok(cmd: &str, spec: &Path, extra: &[&str]) -> (tempfile::TempDir, Value) {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![cmd, spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, err) = martinet(&args);
    assert_eq!(code, 0, "{cmd} {}: {err}", spec.display());
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(text.ends_with("}\n"));
    (dir, serde_json::from_str(&text).unwrap())
}

fn write_spec(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("spec.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn analyze_martinet() {
    let (_d, r) = run_ok("analyze", &fixture("martinet.toml"), &[]);
    let d = &r["results"]["distribution"];
    assert_eq!(d["h"], "x1");
    assert_eq!(d["tangency"]["S_empty"], true);
    assert_eq!(d["sigma_samples"].as_array().unwrap().len(), 100);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 0);
    assert_eq!(r["command"], "analyze");
    assert_eq!(r["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn analyze_heisenberg_reports_empty_sigma() {
    let (_d, r) = run_ok("analyze", &fixture("heisenberg.toml"), &[]);
    assert_eq!(r["results"]["distribution"]["sigma_empty"], true);
}

#[test]
fn every_fixture_analyzes_without_warnings() {
    let dir = fixture("");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let (_d, r) = run_ok("analyze", &p, &[]);
            assert!(r["warnings"].as_array().unwrap().is_empty(), "{}", p.display());
            count += 1;
        }
    }
    assert!(count >= 7);
}

#[test]
fn trace_focus_returns() {
    let (d, r) = run_ok("trace", &fixture("focus2d.toml"), &["--returns", "200"]);
    let res = &r["results"];
    assert_eq!(res["returns"].as_array().unwrap().len(), 200);
    let e = res["fit_exponent"].as_f64().unwrap();
    assert!((0.45..=0.55).contains(&e), "{e}");
    let csv = fs::read_to_string(d.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,x,y,cum_length\n"));
    assert!(csv.lines().count() > 200);
}

#[test]
fn resolve_saddle_is_depth_zero() {
    let (_d, r) = run_ok("resolve", &fixture("saddle.toml"), &[]);
    assert_eq!(r["results"]["depth"], 0);
    assert_eq!(r["results"]["root_classes"], serde_json::json!(["Saddle"]));
}

#[test]
fn resolve_cusp_respects_max_depth() {
    let (_d, r) = run_ok("resolve", &fixture("cusp.toml"), &[]);
    assert_eq!(r["results"]["depth"], 2);
    assert_eq!(r["results"]["all_leaves_elementary"], true);
    let (_d, r) = run_ok("resolve", &fixture("cusp.toml"), &["--max-depth", "1"]);
    assert_eq!(r["results"]["cap_hit"], true);
    assert_eq!(r["flags"]["max_depth"], 1);
}

#[test]
fn reach_and_endpoint() {
    let (d, r) = run_ok("reach", &fixture("martinet.toml"), &[]);
    let res = &r["results"];
    assert_eq!(res["vertices"].as_array().unwrap().len(), 1);
    assert_eq!(res["edges"].as_array().unwrap().len(), 2);
    assert!((res["total_length"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(d.path().join("reach_edge_1.csv").exists());

    let (_d, r) = run_ok("endpoint", &fixture("martinet.toml"), &[]);
    assert_eq!(r["results"]["rank"], 2);
    assert_eq!(r["results"]["pieces"], 16);
}

#[test]
fn divcheck_and_classify() {
    let (_d, r) = run_ok("divcheck", &fixture("focus2d.toml"), &[]);
    assert_eq!(r["results"]["membership"]["f"], "-4*y");
    assert_eq!(r["results"]["membership"]["g"], "4*x");
    let (_d, r) = run_ok("classify", &fixture("twoplanes.toml"), &[]);
    assert_eq!(r["results"]["points"][1]["class"], "Sigma0_candidate");
}

#[test]
fn identical_runs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let (code, _) = martinet(&[
            "analyze",
            fixture("twoplanes.toml").to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let ra = fs::read(a.path().join("report.json")).unwrap();
    let rb = fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn precondition_failures_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap().to_string();
    let m = fixture("martinet.toml");
    let m = m.to_str().unwrap();
    assert_eq!(martinet(&["analyze", m, "--tol", "1e-2", "--out", &out]).0, 2);
    assert_eq!(martinet(&["resolve", m, "--out", &out]).0, 2);
    assert_eq!(martinet(&["analyze", "/nonexistent.toml", "--out", &out]).0, 2);

    let bad = write_spec(&d, "[distribution]\nmode = \"one_form\"\nc = [\"0\", \"x1 +\", \"1\"]\n");
    assert_eq!(martinet(&["analyze", bad.to_str().unwrap(), "--out", &out]).0, 2);

    // integrable: δ = dx3 has h ≡ 0
    let flat = write_spec(&d, "[distribution]\nmode = \"one_form\"\nc = [\"0\", \"0\", \"1\"]\n");
    let (code, err) = martinet(&["analyze", flat.to_str().unwrap(), "--out", &out]);
    assert_eq!(code, 2);
    assert!(err.contains("precondition"));

    let off = write_spec(
        &d,
        "[distribution]\nmode = \"one_form\"\nc = [\"0\", \"-x1^2\", \"1\"]\n[reach]\nstart = [\"1\", \"0\", \"0\"]\nbudget = 1.0\n",
    );
    assert_eq!(martinet(&["reach", off.to_str().unwrap(), "--out", &out]).0, 2);
    assert_eq!(martinet(&["bogus", m]).0, 2);
}

#[test]
fn unwritable_output_exits_1() {
    let d = tempfile::tempdir().unwrap();
    let file = d.path().join("occupied");
    fs::write(&file, "").unwrap();
    let (code, _) = martinet(&[
        "analyze",
        fixture("heisenberg.toml").to_str().unwrap(),
        "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}
