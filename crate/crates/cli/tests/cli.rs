use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_channel-dichotomy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not one JSON document ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sample_writes_a_valid_channel_deterministically() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = run(&["sample", "--n", "2", "--m", "2", "--rank", "1", "--seed", "7", "--out", path_str(p)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());

    let tol = channel_dichotomy::Tolerance::default();
    let phi = channel_dichotomy::io::load_channel(&a, tol).unwrap();
    assert_eq!(phi.len(), 1);
    assert_eq!((phi.dim_h(), phi.dim_k()), (2, 2));
    assert!(phi.unitality_defect() <= 1e-12);
    let file: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(file["seed"]["master_seed"], 7);
}

#[test]
fn sample_rejects_empty_manifold() {
    let out = run(&["sample", "--n", "4", "--m", "1", "--rank", "2", "--seed", "1"]);
    assert_eq!(code(&out), 2);
    let out = run(&["sample", "--n", "4", "--m", "1", "--rank", "2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sampled_file_round_trips_bit_exactly() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("s.json");
    let out = run(&["sample", "--n", "2", "--m", "3", "--rank", "2", "--seed", "11", "--out", path_str(&p)]);
    assert_eq!(code(&out), 0);
    let tol = channel_dichotomy::Tolerance::default();
    let phi = channel_dichotomy::io::load_channel(&p, tol).unwrap();
    let q = dir.path().join("q.json");
    channel_dichotomy::io::save_channel(&q, &phi).unwrap();
    assert_eq!(channel_dichotomy::io::load_channel(&q, tol).unwrap(), phi);

    let report = run(&["analyze", "--channel", path_str(&p)]);
    assert_eq!(code(&report), 0);
    let json = stdout_json(&report);
    assert_eq!(json["seed"]["master_seed"], 11);
    assert_eq!(json["dims"]["m"], 3);
}

#[test]
fn analyze_identity_and_depolarizing() {
    let dir = TempDir::new().unwrap();
    let id = dir.path().join("id.json");
    fs::write(
        &id,
        r#"{"dim_h": 2, "dim_k": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#,
    )
    .unwrap();
    let out = run(&["analyze", "--channel", path_str(&id)]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["rank"], 1);
    assert_eq!(json["extremal"], true);
    assert_eq!(json["classification"], "entanglement-preserving");
    assert_eq!(json["wedge"]["w"], 2);

    let dep = dir.path().join("dep.json");
    let out = run(&["make", "--kind", "holevo", "--n", "2", "--m", "2", "--out", path_str(&dep)]);
    assert_eq!(code(&out), 0);
    let out = run(&["analyze", "--channel", path_str(&dep)]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["rank"], 4);
    assert_eq!(json["extremal"], false);
    assert_eq!(json["classification"], "entanglement-breaking");
}

#[test]
fn invalid_inputs_exit_2_with_diagnostics() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"dim_h\": 2,").unwrap();
    let out = run(&["analyze", "--channel", path_str(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse"));
    assert!(out.stdout.is_empty());

    let non_unital = dir.path().join("nu.json");
    fs::write(
        &non_unital,
        r#"{"dim_h": 2, "dim_k": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[0.5,0]]]]}"#,
    )
    .unwrap();
    let out = run(&["analyze", "--channel", path_str(&non_unital)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unitality"));

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["classify", "--channel", path_str(&missing)])), 2);
    assert_eq!(code(&run(&["analyze", "--channel", path_str(&bad), "--tol", "2"])), 2);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["sample", "--n", "2"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["sample", "--n", "two", "--m", "2", "--rank", "1"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn make_extremal() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("ext.json");
    let out = run(&["make", "--kind", "extremal", "--n", "2", "--m", "2", "--rank", "2", "--out", path_str(&p)]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&run(&["analyze", "--channel", path_str(&p)]));
    assert_eq!(json["extremal"], true);
    assert_eq!(json["rank"], 2);

    assert_eq!(code(&run(&["make", "--kind", "extremal", "--n", "2", "--m", "2", "--rank", "3"])), 2);
    assert_eq!(code(&run(&["make", "--kind", "extremal", "--n", "2", "--m", "2"])), 2);
}

#[test]
fn make_random_holevo_is_entanglement_breaking() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("h.json");
    let out = run(&[
        "make", "--kind", "holevo", "--n", "2", "--m", "3", "--terms", "3", "--seed", "5", "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json = stdout_json(&run(&["classify", "--channel", path_str(&p)]));
    assert_eq!(json["classification"], "entanglement-breaking");
}

#[test]
fn make_holevo_from_file() {
    let dir = TempDir::new().unwrap();
    let form = dir.path().join("form.json");
    // Measure in the computational basis, prepare |0><0| or |1><1|.
    fs::write(
        &form,
        r#"{"omegas": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]],
            "effects": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]]}"#,
    )
    .unwrap();
    let p = dir.path().join("h.json");
    let out = run(&[
        "make", "--kind", "holevo", "--n", "2", "--m", "2", "--holevo", path_str(&form), "--out",
        path_str(&p),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json = stdout_json(&run(&["analyze", "--channel", path_str(&p)]));
    assert_eq!(json["classification"], "entanglement-breaking");

    let out = run(&["make", "--kind", "holevo", "--n", "3", "--m", "2", "--holevo", path_str(&form)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn certify_rank_one_tuple() {
    let dir = TempDir::new().unwrap();
    let dep = dir.path().join("dep.json");
    run(&["make", "--kind", "holevo", "--n", "2", "--m", "2", "--out", path_str(&dep)]);
    let json = stdout_json(&run(&["certify", "--channel", path_str(&dep)]));
    assert_eq!(json["valid"], true);

    let id = dir.path().join("id.json");
    run(&["make", "--kind", "extremal", "--n", "2", "--m", "2", "--rank", "1", "--out", path_str(&id)]);
    let json = stdout_json(&run(&["certify", "--channel", path_str(&id)]));
    assert_eq!(json["valid"], false);

    let cert = dir.path().join("cert.json");
    fs::write(&cert, r#"{"coeffs": [[[1,0]]]}"#).unwrap();
    let json = stdout_json(&run(&["certify", "--channel", path_str(&id), "--cert", path_str(&cert)]));
    assert_eq!(json["valid"], false);
    assert_eq!(json["max_combination_rank"], 2);
}

#[test]
fn experiment_ep_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("ep.csv");
    let out = run(&[
        "experiment", "ep", "--n", "2", "--m", "2", "--rank", "1", "--trials", "1000", "--seed", "1", "--csv",
        path_str(&csv),
    ]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&csv);
    let header = &rows[0];
    let outcome = header.iter().position(|h| h == "outcome").unwrap();
    let fraction = header.iter().position(|h| h == "fraction").unwrap();
    let ep = rows.iter().find(|r| r[outcome] == "entanglement_preserving").unwrap();
    assert_eq!(ep[fraction].parse::<f64>().unwrap(), 1.0);
    let json = stdout_json(&out);
    assert_eq!(json["config"]["seed"], 1);
}

#[test]
fn experiment_zeroone_identity() {
    let dir = TempDir::new().unwrap();
    let id = dir.path().join("id.json");
    run(&["make", "--kind", "extremal", "--n", "2", "--m", "2", "--rank", "1", "--out", path_str(&id)]);
    let out = run(&["experiment", "zeroone", "--channel", path_str(&id), "--trials", "500", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let json = stdout_json(&out);
    assert_eq!(json["counts"]["entangled"], 500);
    assert_eq!(json["estimates"]["entangled"]["fraction"], 1.0);
}

#[test]
fn experiment_scan_has_one_row_per_rank() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("scan.csv");
    let out = run(&[
        "experiment", "scan", "--n", "2", "--m", "2", "--trials", "2000", "--seed", "1", "--csv", path_str(&csv),
    ]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&csv);
    assert_eq!(rows[0], ["r", "ep_fraction", "ci_low", "ci_high"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1][1], "1");
}

#[test]
fn experiment_outputs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (p, threads) in [(&a, "1"), (&b, "3")] {
        let out = bin()
            .args(["experiment", "rank", "--n", "2", "--m", "3", "--rank", "3", "--trials", "50", "--seed", "9"])
            .args(["--out", path_str(p)])
            .env("CHANNEL_DICHOTOMY_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
    }
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_clock_secs");
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn experiment_without_seed_records_one() {
    let out = run(&["experiment", "cyclicity", "--n", "2", "--trials", "5"]);
    assert_eq!(code(&out), 0);
    assert!(stdout_json(&out)["config"]["seed"].is_u64());
}

#[test]
fn experiment_parameter_errors_exit_2() {
    assert_eq!(code(&run(&["experiment", "ep", "--n", "4", "--m", "1", "--rank", "2", "--trials", "5", "--seed", "1"])), 2);
    assert_eq!(code(&run(&["experiment", "scan", "--n", "3", "--m", "3", "--trials", "5", "--seed", "1"])), 2);
    assert_eq!(code(&run(&["experiment", "cyclicity", "--n", "2", "--trials", "0", "--seed", "1"])), 2);
    let out = bin()
        .args(["experiment", "cyclicity", "--n", "2", "--trials", "5", "--seed", "1"])
        .env("CHANNEL_DICHOTOMY_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
