use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ktr_core::problem::{brute_force_knapsack, Instance};
use serde_json::Value;

fn ktr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktr")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const PUBLISHED_TRIMMER: &str = r#"
default_kind = "reference"
[roles.trimmer]
kind = "error_model"
bands = [
  { lo = 1, hi = 8, accuracy = 0.54 },
  { lo = 9, hi = 16, accuracy = 0.24 },
  { lo = 17, hi = 24, accuracy = 0.07 },
  { lo = 25, accuracy = 0.05 },
]
"#;

#[test]
fn generate_counts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for f in [&a, &b] {
        let o = ktr(&["generate", "--problem", "ksp", "--sizes", "3-8", "--count", "100", "--seed", "9", "--out", p(f)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    assert_eq!(String::from_utf8(text).unwrap().lines().count(), 600);

    let o = ktr(&["generate", "--problem", "tap", "--sizes", "1", "--count", "3"]);
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|v| v["cost_matrix"].as_array().unwrap().len() == 1));
}

#[test]
fn solve_matches_brute_force_and_reports_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ksp.jsonl");
    ktr(&["generate", "--problem", "ksp", "--sizes", "3-8", "--count", "10", "--out", p(&input)]);
    let mut text = fs::read_to_string(&input).unwrap();
    text.insert_str(0, "{\"id\": \"broken\"}\n");
    fs::write(&input, &text).unwrap();

    let o = ktr(&["solve", "--problem", "ksp", p(&input)]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("line 1:"), "{}", stderr(&o));
    let answers: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(answers.len(), 60);
    for (line, ans) in text.lines().skip(1).zip(&answers) {
        let Instance::Knapsack(k) = serde_json::from_str(line).unwrap() else { panic!() };
        assert_eq!(ans["id"], k.id.as_str());
        assert_eq!(ans["optimum"], brute_force_knapsack(&k).unwrap());
    }

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let o = ktr(&["solve", "--problem", "tap", p(&empty)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");

    let worked = dir.path().join("w.jsonl");
    fs::write(&worked, "{\"id\":\"w\",\"cost_matrix\":[[4,1,3],[2,0,5],[3,2,2]]}\n").unwrap();
    assert_eq!(stdout(&ktr(&["solve", "--problem", "tap", p(&worked)])), "{\"id\":\"w\",\"optimum\":5}\n");
}

#[test]
fn run_with_reference_and_error_model_backends() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ksp.jsonl");
    ktr(&["generate", "--problem", "ksp", "--sizes", "4-7", "--count", "25", "--out", p(&input)]);
    let traces = dir.path().join("traces");
    let o = ktr(&["run", "--pipeline", "ksp", p(&input), "--trace-dir", p(&traces), "--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["accuracy"], 1.0);
    assert_eq!(report["n"], 100);
    assert_eq!(fs::read_dir(&traces).unwrap().count(), 100);
    let one = fs::read_dir(&traces).unwrap().next().unwrap().unwrap().path();
    let trace: Value = serde_json::from_str(&fs::read_to_string(one).unwrap()).unwrap();
    assert_eq!(trace["schema_version"], 1);

    let cfg = dir.path().join("em.toml");
    fs::write(&cfg, PUBLISHED_TRIMMER).unwrap();
    let run = |seed: &str| {
        ktr(&["run", "--pipeline", "ksp", p(&input), "--config", p(&cfg), "--format", "csv", "--seed", seed])
    };
    let o = run("4");
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("size,n,correct,accuracy\n"));
    let correct: usize = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<usize>().unwrap()).sum();
    assert!(correct < 100);
    assert_eq!(stdout(&run("4")), csv);
}

#[test]
fn tap_pipelines_run_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("tap.jsonl");
    ktr(&["generate", "--problem", "tap", "--sizes", "6-8", "--count", "5", "--out", p(&input)]);
    for pipeline in ["tap", "tap_legacy"] {
        let o = ktr(&["run", "--pipeline", pipeline, p(&input)]);
        assert!(o.status.success(), "{}", stderr(&o));
        let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(report["accuracy"], 1.0, "{pipeline}");
    }
}

#[test]
fn config_errors_are_named_and_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ksp.jsonl");
    ktr(&["generate", "--problem", "ksp", "--sizes", "3", "--count", "2", "--out", p(&input)]);
    let cases = [
        ("[roles.worker]\nkind = \"reference\"\n", "trimmer"),
        ("[roles.sorter]\nkind = \"reference\"\n", "sorter"),
        ("default_kind = \"reference\"\n[roles.trimmer]\nkind = \"error_model\"\nbands = [{ lo = 1, accuracy = 2.0 }]\n", "roles.trimmer"),
        ("default_kind = \"reference\"\n[roles.trimmer]\nkind = \"telepathy\"\n", "telepathy"),
        ("default_kind = \"reference\"\n[roles.worker]\nkind = \"llm\"\n", "endpoint"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.toml"));
        fs::write(&cfg, text).unwrap();
        let o = ktr(&["run", "--pipeline", "ksp", p(&input), "--config", p(&cfg)]);
        assert_eq!(o.status.code(), Some(3), "{text}");
        assert!(stderr(&o).contains(needle), "{}", stderr(&o));
    }
}

#[test]
fn io_and_endpoint_failures_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ktr(&["solve", "--problem", "ksp", p(&dir.path().join("missing.jsonl"))]);
    assert_eq!(o.status.code(), Some(4));

    let input = dir.path().join("ksp.jsonl");
    ktr(&["generate", "--problem", "ksp", "--sizes", "3", "--count", "2", "--out", p(&input)]);
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = dir.path().join("llm.toml");
    fs::write(
        &cfg,
        format!("default_kind = \"reference\"\n[endpoint]\nbase_url = \"http://127.0.0.1:{port}\"\nmodel_name = \"m\"\ntimeout_secs = 2\n[roles.trimmer]\nkind = \"llm\"\n"),
    )
    .unwrap();
    let o = ktr(&["run", "--pipeline", "ksp", p(&input), "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["correct"], 0);

    assert_eq!(ktr(&["generate", "--problem", "ksp"]).status.code(), Some(2));
}

#[test]
fn profile_reference_and_error_model_trimmer() {
    let o = ktr(&["profile", "--role", "trimmer", "--bands", "1-8,9-16", "--samples", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "role,band,accuracy,n\ntrimmer,1-8,1.000000,30\ntrimmer,9-16,1.000000,30\n");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("em.toml");
    fs::write(&cfg, PUBLISHED_TRIMMER).unwrap();
    let o = ktr(&["profile", "--role", "trimmer", "--bands", "1-8,9-16,17-24,25-32", "--samples", "500", "--config", p(&cfg), "--seed", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for (line, want) in stdout(&o).lines().skip(1).zip([0.54, 0.24, 0.07, 0.05]) {
        let acc: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        let sigma = (want * (1.0 - want) / 500.0f64).sqrt();
        assert!((acc - want).abs() <= 3.0 * sigma, "{line}");
    }

    let o = ktr(&["profile", "--role", "sorter", "--bands", "1-8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sorter"));
}

#[test]
fn nfl_calculator() {
    let o = ktr(&["nfl", "--eps0", "0.3", "--eps1", "0.1", "--eps2", "0.5", "--p", "0.6"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["advantageous"], true);
    assert!((v["p_threshold"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["risk_special"].as_f64().unwrap() - 0.26).abs() < 1e-12);
    let o = ktr(&["nfl", "--eps0", "0.3", "--eps1", "0.4", "--eps2", "0.4", "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}
