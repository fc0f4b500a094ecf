use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lao_core::ReliabilityMatrix;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn lao(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lao"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn family_file(dir: &tempfile::TempDir, body: &str) -> String {
    let path = dir.path().join("family.toml");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn three() -> String {
    data("three_binary.toml").display().to_string()
}

#[test]
fn reliability_json_round_trips() {
    let out = lao(&["--family", &three(), "reliability", "--spec", "0.1,0.1"]);
    let doc = json_of(&out);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["command"], "reliability");
    assert_eq!(doc["log_base"], 2.0);
    assert_eq!(doc["result"]["compatibility"]["compatible"], true);
    let m: ReliabilityMatrix = serde_json::from_value(doc["result"]["matrix"].clone()).unwrap();
    assert_eq!(m.size(), 3);
    assert!((m.get(0, 0) - 0.1).abs() < 1e-12);
    assert!((m.get(1, 1) - 0.1).abs() < 1e-12);
    // last diagonal entry is the smallest exponent of its row
    assert_eq!(m.get(2, 2), m.row_min_off_diagonal(2));
}

#[test]
fn row_off_the_simplex_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = family_file(
        &dir,
        "schema = 1\nalphabet = [\"a\", \"b\"]\nhypotheses = [[0.5, 0.3], [0.2, 0.8]]\n",
    );
    let out = lao(&["--family", &f, "reliability", "--spec", "0.1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("hypothesis row 1"), "{}", stderr(&out));
}

#[test]
fn duplicate_hypotheses_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = family_file(
        &dir,
        "schema = 1\nalphabet = [\"a\", \"b\"]\nhypotheses = [[0.3, 0.7], [0.6, 0.4], [0.3, 0.7]]\n",
    );
    let out = lao(&["--family", &f, "compat", "--spec", "0.1,0.1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("hypotheses 1 and 3 are not distinct"), "{}", stderr(&out));
}

#[test]
fn zero_specification_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = family_file(&dir, "schema = 1\nalphabet = [\"a\", \"b\"]\nhypotheses = [[0.3, 0.7], [0.6, 0.4]]\n");
    let out = lao(&["--family", &f, "reliability", "--spec", "0"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("positive"), "{}", stderr(&out));
}

#[test]
fn malformed_family_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = family_file(&dir, "schema = 1\nalphabet = [\"a\", \"b\"\n");
    let out = lao(&["--family", &f, "compat", "--spec", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
    let f = family_file(&dir, "schema = 9\nalphabet = [\"a\", \"b\"]\nhypotheses = [[0.3, 0.7], [0.6, 0.4]]\n");
    assert_eq!(lao(&["--family", &f, "compat", "--spec", "0.1"]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lao(&["reliability"]).status.code(), Some(2));
    assert_eq!(lao(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn strict_mode_names_the_failing_hypothesis() {
    let out = lao(&["--family", &three(), "reliability", "--spec", "0.05,2.0", "--strict"]);
    assert_eq!(out.status.code(), Some(4));
    let msg = stderr(&out);
    assert!(msg.contains("hypothesis 2"), "{msg}");
    assert!(msg.contains("D(G3 || G2)"), "{msg}");
    // without --strict the matrix is still produced, with a warning
    let out = lao(&["--family", &three(), "reliability", "--spec", "0.05,2.0"]);
    let doc = json_of(&out);
    assert_eq!(doc["result"]["compatibility"]["compatible"], false);
    assert_eq!(doc["result"]["has_zero"], true);
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn csv_carries_metadata() {
    let out = lao(&["--family", &three(), "--format", "csv", "reliability", "--spec", "0.1,0.1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# schema: 1"));
    assert!(lines.iter().any(|l| l.starts_with("# log_base: 2")));
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(lines[header], "true,accepted,exponent");
    assert_eq!(lines.len() - header - 1, 9);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = lao(&[
        "--family",
        &three(),
        "--out",
        path.to_str().unwrap(),
        "reject",
        "--spec",
        "0.1,0.1,0.1",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(doc["result"]["reject"].as_array().unwrap().len(), 3);
}

#[test]
fn base_override_rescales() {
    let bits = json_of(&lao(&["--family", &three(), "reliability", "--spec", "0.1,0.1"]));
    let nats = json_of(&lao(&["--family", &three(), "--base", "2.718281828459045", "reliability", "--spec", "0.06931471805599453,0.06931471805599453"]));
    let b = bits["result"]["matrix"]["entries"][1][0].as_f64().unwrap();
    let n = nats["result"]["matrix"]["entries"][1][0].as_f64().unwrap();
    assert!((b * std::f64::consts::LN_2 - n).abs() < 1e-9, "{b} bits vs {n} nats");
}

#[test]
fn sweep_reports_zero_onset() {
    let doc = json_of(&lao(&[
        "--family",
        &three(),
        "sweep",
        "--spec",
        "0.05,0.5",
        "--axis",
        "1:2=1.0:1.8:0.01",
        "--probe",
        "2,3|3,3",
    ]));
    let onset = doc["result"]["zero_onsets"][0]["zero_onset"].as_f64().unwrap();
    // D(G3 || G2) for the example family
    let threshold = 0.77 * (0.77f64 / 0.15).log2() + 0.23 * (0.23f64 / 0.85).log2();
    assert!(onset >= threshold && onset <= threshold + 0.0101, "{onset} vs {threshold}");
    assert_eq!(doc["result"]["points"].as_array().unwrap().len(), 81);
}

#[test]
fn simulation_agrees_with_enumeration() {
    let sim = json_of(&lao(&[
        "--family", &three(), "--seed", "11", "simulate", "--spec", "0.05,0.5", "--n", "15,30", "--trials", "20000",
    ]));
    assert_eq!(sim["seed"], 11);
    assert_eq!(sim["result"]["disagreements"], 0);
    let en = json_of(&lao(&["--family", &three(), "enumerate", "--spec", "0.05,0.5", "--n-grid", "15,30"]));
    let exact = en["result"]["per_n"][1]["probabilities"][1][1].as_f64().unwrap();
    let sim_exact = sim["result"]["per_n"][1]["entries"][4]["exact"].as_f64().unwrap();
    assert_eq!(exact, sim_exact);
    assert_eq!(en["result"]["sandwich_failures"], 0);
}

#[test]
fn simulation_is_reproducible() {
    let args = ["--family", &three(), "--seed", "5", "simulate", "--spec", "0.1,0.1", "--n", "10", "--trials", "500"];
    let a = json_of(&lao(&args));
    let b = json_of(&lao(&args));
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn pair_identification_needs_its_conditions() {
    let out = lao(&["--family", &three(), "identify", "--r", "1", "--r2", "2", "--e", "0.3"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("hypothesis 1"));
    let out = lao(&["--family", &three(), "identify", "--r", "1", "--r2", "2", "--e", "0.3", "--force"]);
    assert!(stderr(&out).contains("warning"));
    assert!(json_of(&out)["result"]["exponent"].as_f64().unwrap() >= 0.0);
    let doc = json_of(&lao(&["--family", &three(), "identify", "--r", "2", "--e", "0.05"]));
    assert_eq!(doc["result"]["conditions"][0]["holds"], true);
}

#[test]
fn compound_and_dependent_run() {
    let doc = json_of(&lao(&["--family", &three(), "compound", "--objects", "2", "--spec", "0.05,0.05"]));
    assert_eq!(doc["result"]["entries"].as_array().unwrap().len(), 81);
    let doc = json_of(&lao(&[
        "--family",
        &data("dependent_pair.toml").display().to_string(),
        "dependent",
        "--marginal-spec",
        "0.1",
        "--conditional-spec",
        "0.1;0.2",
    ]));
    assert_eq!(doc["result"]["entries"].as_array().unwrap().len(), 16);
    assert_eq!(doc["result"]["compatible"], true);
    let out = lao(&["--family", &three(), "dependent", "--marginal-spec", "0.1", "--conditional-spec", "0.1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn classify_reads_samples() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.txt");
    std::fs::write(&s, "a a a a b\nb b b b b b\n").unwrap();
    let doc = json_of(&lao(&["--family", &three(), "classify", "--spec", "0.1,0.1", "--sample", s.to_str().unwrap()]));
    let samples = doc["result"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 2);
    assert_eq!(samples[0]["outcome"], "2");
    std::fs::write(&s, "a c\n").unwrap();
    let out = lao(&["--family", &three(), "classify", "--spec", "0.1,0.1", "--sample", s.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}
