use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kinpart::cli::{simulate_to_writer, RunConfig};
use kinpart::csvio::{read_reports, write_reports};

fn kinpart(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kinpart"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("KINPART_THREADS", t),
        None => cmd.env_remove("KINPART_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn simulate(out: &Path, threads: Option<&str>) -> Output {
    kinpart(
        &[
            "simulate",
            "--d",
            "2",
            "--n-min",
            "3",
            "--n-max",
            "5",
            "--samples",
            "5000",
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
        ],
        threads,
    )
}

#[test]
fn partition_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pair.json");
    let s = 0.5f64.sqrt();
    let body = serde_json::json!({
        "masses": [1.0, 1.0],
        "positions": [[s, 0.0], [-s, 0.0]],
        "velocities": [[0.0, s], [0.0, -s]],
    });
    fs::write(&input, body.to_string()).unwrap();
    let out = kinpart(&["partition", "--input", input.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let get = |k: &str| v[k].as_f64().unwrap();
    assert!((get("T") - 0.5).abs() < 1e-15);
    assert!((get("T_rot") - 0.5).abs() < 1e-15);
    assert!(get("T_rho").abs() < 1e-15);
    assert_eq!(get("M"), 2.0);
}

#[test]
fn malformed_partition_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.json");
    fs::write(&input, r#"{"masses": [1.0], "positions": [], "velocities": []}"#).unwrap();
    let out = kinpart(&["partition", "--input", input.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<Vec<u8>> = [Some("1"), Some("3"), None]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = dir.path().join(format!("run{i}.csv"));
            assert!(simulate(&p, *t).status.success());
            fs::read(&p).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(&dir.path().join("x.csv"), Some("0"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn header_reproduces_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.csv");
    assert!(simulate(&p, None).status.success());
    let bytes = fs::read(&p).unwrap();
    let parsed = read_reports(bytes.as_slice()).unwrap();
    let cfg: RunConfig = serde_json::from_str(&parsed.config_json).unwrap();
    assert_eq!((cfg.d, cfg.n_min, cfg.n_max, cfg.samples, cfg.seed), (2, 3, 5, 5000, 3));
    let mut again = Vec::new();
    simulate_to_writer(&cfg, &mut again).unwrap();
    assert_eq!(again, bytes);
}

#[test]
fn verify_gates_on_shifted_means() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    assert!(simulate(&good, None).status.success());
    let out = kinpart(&["verify", "--input", good.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));

    let mut parsed = read_reports(fs::read(&good).unwrap().as_slice()).unwrap();
    let row = parsed.rows.iter_mut().find(|r| r.n == 4 && r.term == "T_rot").unwrap();
    row.mean += 10.0 * row.stderr;
    let bad = dir.path().join("bad.csv");
    let mut buf = Vec::new();
    write_reports(&mut buf, &parsed.config_json, &parsed.rows).unwrap();
    fs::write(&bad, buf).unwrap();
    let out = kinpart(&["verify", "--input", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn oracle_check_passes() {
    let out = kinpart(&["oracle-check", "--d", "3", "--n", "5", "--samples", "50"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}
