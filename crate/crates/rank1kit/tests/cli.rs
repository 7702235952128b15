use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rank1kit::commands::bundled_schottky;
use rank1kit::formats::{write_length_table, RepDto};
use rank1kit_core::spectrum::{budget_words, LengthOracle};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rank1kit"));
    c.env_remove("RANK1KIT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn vogt_identity_traces() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "t.json",
        r#"{"x1":2,"x2":2,"x3":2,"y12":2,"y13":2,"y23":2}"#,
    );
    let o = run(&["vogt", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["P"], 4.0);
    assert_eq!(v["Q"], 4.0);
    assert_eq!(v["Delta"], 0.0);
}

#[test]
fn lemma1_on_bundled_example() {
    let o = run(&["lemma1", "--n", "24"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "n,seq,crossratio,rel_error");
    assert_eq!(lines.len(), 25);
    let last: Vec<f64> = lines[24].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 24.0);
    assert!(last[3] <= 1e-5, "{}", lines[24]);
}

#[test]
fn lemma2_table() {
    let o = run(&["lemma2", "--n", "50", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 51);
    for line in text.lines().skip(1) {
        let err: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(err <= 1e-12);
    }
}

#[test]
fn lemma2_rejects_parabolic_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "m.json", r#"{"matrices":[[2.5,-1,1,0],[1,1,0,1]]}"#);
    let o = run(&["lemma2", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("matrices[1]"), "{}", stderr(&o));
}

#[test]
fn crossratio_project_and_act() {
    let dir = tempfile::tempdir().unwrap();
    let points = r#"{
        "space": {"kind": "H", "m": 2},
        "points": [
            {"center": [0, 0.5, 0, 0], "horizontal": [[1, 0, 0.3, 0]]},
            {"center": [0, 0, -1, 0], "horizontal": [[0, 0.2, 0, 1]]},
            "infinity",
            {"center": [0, 0, 0, 0.7], "horizontal": [[-0.4, 0, 0, 0]]}
        ],
        "isometry": {"nu": [0, 1, 0, 0], "s": 0.4}
    }"#;
    let input = write(dir.path(), "p.json", points);
    let p = input.to_str().unwrap();
    let o = run(&["crossratio", "--input", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (nil, ball) = (v["nil"].as_f64().unwrap(), v["ball"].as_f64().unwrap());
    assert!((nil - ball).abs() <= 1e-9 * nil);

    let o = run(&["project", "--input", p]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["points"][2]["w2"], serde_json::json!([-1.0, 0.0, 0.0, 0.0]));

    let o = run(&["act", "--input", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["max_equivariance_gap"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["nil"][2], "infinity");
}

#[test]
fn malformed_point_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "p.json",
        r#"{"space":{"kind":"C","m":2},"points":[{"center":[1,0],"horizontal":[[0,0]]}]}"#,
    );
    let o = run(&["project", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("points[0]"), "{}", stderr(&o));
}

#[test]
fn jacobian_reports_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let rep = serde_json::to_string(&RepDto::from_rep(&bundled_schottky())).unwrap();
    let input = write(dir.path(), "r.json", &rep);
    let o = run(&["jacobian", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["length"]["rank"], 6);
    assert_eq!(v["trace"]["rank"], 3);
    assert_eq!(v["trace"]["kernel_dim"], 3);
    assert_eq!(v["length"]["kernel_dim"], 6);
    assert!(v["trace"]["singular_values"].is_array());
    assert!(v["trace"]["tolerance"].is_number());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["--bad"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let o = run(&["vogt", "--input", "/nonexistent/traces.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--input"));
    assert_eq!(run(&["vogt"]).status.code(), Some(1));
}

#[test]
fn failure_writes_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let input = write(dir.path(), "t.json", r#"{"x1":2}"#);
    let o = run(&[
        "vogt",
        "--input",
        input.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("x2"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn reconstruct_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("rec{threads}.json"));
        let o = bin()
            .env("RANK1KIT_THREADS", threads)
            .args(["reconstruct", "--seed", "5", "--output", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let v: Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert!(v["conjugacy_distance"].as_f64().unwrap() <= 1e-4);
    for h in v["held_out"].as_array().unwrap() {
        assert!((h["target"].as_f64().unwrap() - h["fitted"].as_f64().unwrap()).abs() <= 1e-3);
    }
}

#[test]
fn reconstruct_from_length_table() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = LengthOracle::from_rep(bundled_schottky());
    let rows = oracle.tabulate(&budget_words(2)).unwrap();
    let path = dir.path().join("lengths.csv");
    write_length_table(std::fs::File::create(&path).unwrap(), &rows).unwrap();
    let o = run(&["reconstruct", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["conjugacy_distance"].is_null());
    assert!(v["residual_rms"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn inconsistent_lengths_do_not_converge() {
    let dir = tempfile::tempdir().unwrap();
    let oracle = LengthOracle::from_rep(bundled_schottky());
    let mut rows = oracle.tabulate(&budget_words(2)).unwrap();
    for (i, (_, l)) in rows.iter_mut().enumerate() {
        *l *= 1.0 + 0.05 * ((i * 7919) % 13) as f64 / 13.0;
    }
    let path = dir.path().join("lengths.csv");
    write_length_table(std::fs::File::create(&path).unwrap(), &rows).unwrap();
    let out = dir.path().join("out.json");
    let o = run(&[
        "reconstruct",
        "--input",
        path.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
    assert!(!out.exists());
}

#[test]
fn bad_thread_count_is_a_validation_error() {
    let o = bin()
        .env("RANK1KIT_THREADS", "0")
        .args(["reconstruct"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("RANK1KIT_THREADS"));
}

#[test]
fn verify_prints_matrix_and_reports() {
    let o = run(&["verify", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.contains(" PASS ")).count() > 20);
    assert!(!text.contains(" FAIL "));
    assert!(text.contains("identity readings"));
    for reading in ["literal", "inverse-on-r3", "corrected"] {
        assert!(text.contains(reading));
    }
    assert!(text.contains("commuting triple, 7 words: 3"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = run(&["lemma2", "--n", "20", "--seed", "9"]);
    let b = run(&["lemma2", "--n", "20", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["verify", "--n", "5", "--seed", "2"]);
    let d = run(&["verify", "--n", "5", "--seed", "2"]);
    assert_eq!(c.stdout, d.stdout);
}
