use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_famsynth");

fn examples() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/examples")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn toy4() -> String {
    examples().join("toy4.json").display().to_string()
}

fn spec_file(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("spec.props");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn feasible_toy4_with_every_method() {
    let spec = examples().join("toy4.props").display().to_string();
    for method in ["onebyone", "cegis", "ar", "hybrid"] {
        let out = run(&[
            "synth",
            "--sketch",
            &toy4(),
            "--spec",
            &spec,
            "--method",
            method,
            "--json",
        ]);
        assert_eq!(code(&out), 0, "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_eq!(v["verdict"], "feasible");
        assert_eq!(v["realization"]["X"], "s2");
        assert_eq!(v["realization"]["Y"], "f");
        let value = v["values"][0]["value"].as_f64().unwrap();
        assert!((value - 0.2).abs() < 1e-6);
    }
}

#[test]
fn infeasible_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(&dir, "P<=0.1 [F t]\n");
    let out = run(&["synth", "--sketch", &toy4(), "--spec", &spec, "--json"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["verdict"], "infeasible");
    assert_eq!(
        v["pruned"].as_str().unwrap().parse::<u64>().unwrap() + v["checked"].as_str().unwrap().parse::<u64>().unwrap(),
        4
    );
}

#[test]
fn optimal_with_exact_check() {
    let spec = examples().join("toy4-min.props").display().to_string();
    let out = run(&[
        "synth",
        "--sketch",
        &toy4(),
        "--spec",
        &spec,
        "--method",
        "ar",
        "--exact",
        "--seed",
        "5",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "optimal");
    assert!((v["objective"].as_f64().unwrap() - 0.2).abs() < 1e-9);
    assert_eq!(v["certified"], true);
    assert_eq!(v["seed"], 5);
}

#[test]
fn human_output() {
    let spec = examples().join("toy4.props").display().to_string();
    let out = run(&[
        "synth",
        "--sketch",
        &toy4(),
        "--spec",
        &spec,
        "--bounds",
        "trivial",
        "--cost-units",
        "wallclock",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("verdict: feasible\n"), "{text}");
    assert!(text.contains("X=s2"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(&dir, "P<=0.3 [F goal]\n");
    let out = run(&["synth", "--sketch", &toy4(), "--spec", &spec]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown target"));

    let sketch = dir.path().join("bad.json");
    fs::write(&sketch, fs::read_to_string(toy4()).unwrap().replace("0.6", "0.5")).unwrap();
    let spec = examples().join("toy4.props").display().to_string();
    let out = run(&["synth", "--sketch", sketch.to_str().unwrap(), "--spec", &spec]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("transitions.s1"));

    let out = run(&["synth", "--sketch", "/nonexistent.json", "--spec", &spec]);
    assert_eq!(code(&out), 2);
    let out = run(&["synth", "--sketch", &toy4(), "--spec", &spec, "--method", "magic"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn member_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let sketch = dir.path().join("big.json");
    let out = run(&[
        "bench",
        "gen",
        "--states",
        "12",
        "--params",
        "24",
        "--domain",
        "2",
        "--seed",
        "1",
        "-o",
        sketch.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let spec = spec_file(&dir, "P>=0.5 [F goal]\n");
    let out = run(&[
        "synth",
        "--sketch",
        sketch.to_str().unwrap(),
        "--spec",
        &spec,
        "--method",
        "onebyone",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "bench",
            "gen",
            "--states",
            "10",
            "--params",
            "3",
            "--domain",
            "2",
            "--seed",
            "7",
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let spec = spec_file(&dir, "P>=0.2 [F goal]\n");
    let out = run(&["synth", "--sketch", a.to_str().unwrap(), "--spec", &spec, "--json"]);
    assert!(matches!(code(&out), 0 | 1));

    let out = run(&[
        "bench",
        "gen",
        "--states",
        "3",
        "--params",
        "9",
        "--domain",
        "2",
        "-o",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ce_report_modes() {
    let spec = examples().join("toy4.props").display().to_string();
    let out = run(&[
        "ce-report",
        "--sketch",
        &toy4(),
        "--spec",
        &spec,
        "--mode",
        "family",
        "--minimal-oracle",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let family = json(&out);
    let entries = family["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[0]["conflict"], serde_json::json!(["X"]));
    assert_eq!(entries[0]["ratio"], 0.5);

    let out = run(&[
        "ce-report",
        "--sketch",
        &toy4(),
        "--spec",
        &spec,
        "--mode",
        "trivial",
        "--json",
    ]);
    let trivial = json(&out);
    assert_eq!(trivial["entries"][0]["ratio"], 1.0);
    assert!(trivial["mean_ratio"].as_f64().unwrap() >= family["mean_ratio"].as_f64().unwrap());

    let out = run(&["ce-report", "--sketch", &toy4(), "--spec", &spec]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("mean ratio"));
}

#[test]
fn ce_report_without_violators() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(&dir, "P<=0.9 [F t]\n");
    let out = run(&["ce-report", "--sketch", &toy4(), "--spec", &spec, "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["entries"], serde_json::json!([]));
}
