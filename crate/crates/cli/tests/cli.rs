//! End-to-end tests driving the built binary: CSV schemas, replay
//! determinism, manifest digests, exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const LN_2: f64 = std::f64::consts::LN_2;

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("collisim-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&p);
    std::fs::create_dir_all(&p).unwrap();
    p
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collisim"))
        .args(args)
        .current_dir(dir)
        .env_remove("COLLISIM_SEED")
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Parses a CSV file into (header, rows of fields).
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let body = std::fs::read_to_string(path).unwrap();
    let mut lines = body.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn f(field: &str) -> f64 {
    field.parse().unwrap_or_else(|_| panic!("not a float: '{field}'"))
}

#[test]
fn coherence_schema_zero_crossing_and_manifest_digest() {
    let dir = scratch("coherence");
    let out = run(
        &dir,
        &["coherence", "--n", "10", "--theta", "pi", "--lambda", "1", "--t-max", "30", "--points", "301"],
    );
    assert_ok(&out);

    let csv_path = dir.join("coherence.csv");
    let (header, rows) = read_csv(&csv_path);
    assert_eq!(header, ["t", "c_analytic", "c_mc_mean", "c_mc_stderr", "n_collisions_mean"]);
    assert_eq!(rows.len(), 301);
    assert!(rows.iter().all(|r| r[2].is_empty() && r[3].is_empty() && r[4].is_empty()));

    // even n: the factor dips to zero at t_m without changing sign
    let tm = 10.0 * LN_2;
    let dip = rows
        .iter()
        .min_by(|a, b| f(&a[1]).abs().total_cmp(&f(&b[1]).abs()))
        .unwrap();
    assert!((f(&dip[0]) - tm).abs() <= 0.1 + 1e-12);
    assert!(rows.iter().all(|r| f(&r[1]) >= 0.0));

    // odd n: a genuine sign change brackets n ln2
    let out9 = run(&dir, &["coherence", "--n", "9", "--t-max", "30", "--points", "301", "--out", "c9.csv"]);
    assert_ok(&out9);
    let (_, rows9) = read_csv(&dir.join("c9.csv"));
    let tm9 = 9.0 * LN_2;
    let crossing = rows9.windows(2).find(|w| f(&w[0][1]) > 0.0 && f(&w[1][1]) < 0.0).unwrap();
    assert!(f(&crossing[0][0]) < tm9 && tm9 < f(&crossing[1][0]));

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("coherence.manifest.json")).unwrap()).unwrap();
    assert!((manifest["metadata"]["t_m"].as_f64().unwrap() - tm).abs() < 1e-12);
    let digest = format!("{:x}", Sha256::digest(std::fs::read(&csv_path).unwrap()));
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap(), digest);
    assert_eq!(manifest["outputs"][0]["path"].as_str().unwrap(), "coherence.csv");

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn infinite_reservoir_column_is_the_exponential() {
    let dir = scratch("exponential");
    let out = run(&dir, &["coherence", "--n", "inf", "--theta", "pi/2", "--t-max", "4", "--points", "41"]);
    assert_ok(&out);
    let (_, rows) = read_csv(&dir.join("coherence.csv"));
    for r in &rows {
        assert!((f(&r[1]) - (-f(&r[0])).exp()).abs() < 1e-12);
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn gksl_route_tracks_the_closed_form() {
    let dir = scratch("gksl");
    let args_common = ["--theta", "1.1", "--omega", "0.7", "--t-max", "5", "--points", "26"];
    let mut a = vec!["coherence", "--mode", "gksl", "--out", "g.csv"];
    a.extend_from_slice(&args_common);
    assert_ok(&run(&dir, &a));
    let mut b = vec!["coherence", "--mode", "analytic", "--out", "a.csv"];
    b.extend_from_slice(&args_common);
    assert_ok(&run(&dir, &b));

    let (_, g) = read_csv(&dir.join("g.csv"));
    let (_, a) = read_csv(&dir.join("a.csv"));
    for (rg, ra) in g.iter().zip(&a) {
        assert!((f(&rg[1]) - f(&ra[1])).abs() < 1e-8, "t = {}", rg[0]);
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn mc_runs_replay_byte_identically_and_seeds_matter() {
    let dir = scratch("mc-replay");
    let base = [
        "coherence", "--mode", "mc", "--n", "10", "--traj", "4000", "--t-max", "10", "--points", "21",
    ];
    for (out_name, seed) in [("m1.csv", "7"), ("m2.csv", "7"), ("m4.csv", "8")] {
        let mut args = base.to_vec();
        args.extend_from_slice(&["--seed", seed, "--out", out_name]);
        assert_ok(&run(&dir, &args));
    }
    // env var stands in for the flag
    let mut args = base.to_vec();
    args.extend_from_slice(&["--out", "m3.csv"]);
    let out = Command::new(env!("CARGO_BIN_EXE_collisim"))
        .args(&args)
        .current_dir(&dir)
        .env("COLLISIM_SEED", "7")
        .output()
        .unwrap();
    assert_ok(&out);

    let m1 = std::fs::read(dir.join("m1.csv")).unwrap();
    assert_eq!(m1, std::fs::read(dir.join("m2.csv")).unwrap());
    assert_eq!(m1, std::fs::read(dir.join("m3.csv")).unwrap());
    assert_ne!(m1, std::fs::read(dir.join("m4.csv")).unwrap());

    // mc rows carry estimates next to the closed form
    let (_, rows) = read_csv(&dir.join("m1.csv"));
    assert_eq!(f(&rows[0][2]), 1.0);
    assert_eq!(f(&rows[0][3]), 0.0);
    let last = rows.last().unwrap();
    assert!((f(&last[2]) - f(&last[1])).abs() < 5.0 * f(&last[3]).max(1e-3));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn darwinism_emitters_plateau_and_oracle_column() {
    let dir = scratch("darwinism");
    let tm6 = format!("{}", 6.0 * LN_2);
    let out = run(
        &dir,
        &["darwinism", "--n", "6", "--oracle", "--fractions", "13", "--times", &format!("1.0,{tm6}")],
    );
    assert_ok(&out);
    let (header, rows) = read_csv(&dir.join("darwinism.csv"));
    assert_eq!(
        header,
        ["setting", "t", "f", "k", "i_f_bits", "h_s_bits", "ratio", "i_f_oracle_bits"]
    );
    assert_eq!(rows.len(), 2 * 13);
    for r in &rows {
        assert_eq!(r[0], "emitters");
        assert!((f(&r[4]) - f(&r[7])).abs() < 1e-9, "oracle disagrees at t={} f={}", r[1], r[2]);
    }
    // the half-fraction fragment carries exactly the system entropy
    for r in rows.iter().filter(|r| f(&r[2]) == 0.5) {
        assert!((f(&r[6]) - 1.0).abs() < 1e-12);
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn darwinism_ancillae_needs_the_whole_environment() {
    let dir = scratch("ancillae");
    let out = run(&dir, &["darwinism", "--setting", "ancillae", "--n", "1000", "--fractions", "11"]);
    assert_ok(&out);
    let (header, rows) = read_csv(&dir.join("darwinism.csv"));
    assert_eq!(header, ["setting", "t", "f", "k", "i_f_bits", "h_s_bits", "ratio"]);
    // default times are {0.1, 0.5, 1, 2, 3} t_m
    assert_eq!(rows.len(), 5 * 11);
    let tm = 1000.0 * LN_2;
    let at_tm: Vec<_> = rows.iter().filter(|r| (f(&r[1]) - tm).abs() < 1e-9).collect();
    assert_eq!(at_tm.len(), 11);
    for r in &at_tm {
        let ratio = f(&r[6]);
        if f(&r[2]) < 1.0 {
            assert!(ratio < 0.01, "f = {}", r[2]);
        } else {
            assert!((ratio - 1.0).abs() < 1e-12);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn nonmarkov_reference_rows() {
    let dir = scratch("nonmarkov");
    assert_ok(&run(&dir, &["nonmarkov", "--n", "10,1"]));
    let (header, rows) = read_csv(&dir.join("nonmarkov.csv"));
    assert_eq!(header, ["n", "theta", "lambda", "t_m", "blp"]);
    // rows come out sorted by n
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[1][0], "10");
    assert!((f(&rows[0][3]) - LN_2).abs() < 1e-12);
    assert!((f(&rows[1][3]) - 10.0 * LN_2).abs() < 1e-12);
    assert!((f(&rows[0][4]) - 1.0).abs() < 1e-6);

    assert_ok(&run(&dir, &["nonmarkov", "--n", "7", "--theta", "pi/2", "--out", "orth.csv"]));
    let (_, rows) = read_csv(&dir.join("orth.csv"));
    assert!(rows[0][3].is_empty(), "no mixture time away from full dephasing");
    assert!(f(&rows[0][4]).abs() <= 1e-9);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn usage_errors_exit_with_code_2() {
    let dir = scratch("usage");
    for args in [
        vec!["coherence", "--mode", "gksl", "--n", "10"],
        vec!["nonmarkov", "--n", "inf"],
        vec!["darwinism", "--n", "20", "--oracle"],
        vec!["coherence", "--theta", "pie"],
        vec!["coherence", "--points", "1"],
        vec!["coherence", "--t-max", "-3"],
        vec!["darwinism", "--theta", "pi/3"],
        vec!["nonmarkov", "--n", "0"],
    ] {
        let out = run(&dir, &args);
        assert_eq!(out.status.code(), Some(2), "args: {args:?}");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn validate_quick_reports_the_known_red_check() {
    let dir = scratch("validate");
    let out = run(&dir, &["validate", "--quick"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("plateau_absent_tenth_mixture"), "stderr: {stderr}");

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("validate_report.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], serde_json::Value::Bool(false));
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == serde_json::Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["plateau_absent_tenth_mixture"]);
    let _ = std::fs::remove_dir_all(&dir);
}
