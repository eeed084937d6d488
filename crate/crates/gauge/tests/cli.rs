use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tgauge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tgauge")).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

/// Rank-1 truth on a 3×3×3 grid, observed everywhere with high probability.
fn rank_one(dir: &Path) -> PathBuf {
    let out = tgauge(dir, &["gen", "--shape", "3,3,3", "--terms", "1", "--n", "2000", "--seed", "4"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir.join("samples.csv")
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--shape", "5,5,5", "--terms", "3", "--n", "500", "--seed", "7"];
    assert_eq!(code(&tgauge(dir.path(), &args)), 0);
    let (t1, s1) = (read(dir.path(), "truth.json"), read(dir.path(), "samples.csv"));
    assert_eq!(s1.lines().count(), 501);
    assert_eq!(code(&tgauge(dir.path(), &args)), 0);
    assert_eq!(read(dir.path(), "truth.json"), t1);
    assert_eq!(read(dir.path(), "samples.csv"), s1);
}

#[test]
fn gen_usage_errors_and_large_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let out = tgauge(dir.path(), &["gen", "--shape", "5,5,5", "--terms", "0", "--n", "5"]);
    assert_eq!(code(&out), 2);
    let out = tgauge(dir.path(), &["gen", "--shape", "5,0", "--n", "5"]);
    assert_eq!(code(&out), 2);
    let out = tgauge(dir.path(), &["frobnicate"]);
    assert_eq!(code(&out), 2);
    let out = tgauge(dir.path(), &["gen", "--shape", "10,10,10,10,10,10,10", "--terms", "10", "--n", "100"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(read(dir.path(), "truth.json").contains("\"shape\""));
    let out = tgauge(dir.path(), &["gen", "--shape", "3,3", "--n", "5", "--truth-out", "missing/dir/t.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn solve_recovers_a_single_vertex() {
    let dir = tempfile::tempdir().unwrap();
    rank_one(dir.path());
    let out = tgauge(
        dir.path(),
        &["solve", "--samples", "samples.csv", "--shape", "3,3,3", "--trace-out", "trace.jsonl", "--no-timing"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let line = stdout(&out);
    assert!(line.starts_with("status converged"), "{line}");
    assert!(line.trim_end().ends_with("terms 1"), "{line}");
    let trace = read(dir.path(), "trace.jsonl");
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert_eq!(first["phase"], "init");
    for key in ["iteration", "objective", "phi", "active_size", "oracle_seconds"] {
        assert!(first.get(key).is_some(), "{key}");
    }

    let out = tgauge(dir.path(), &["eval", "--model", "model.json", "--truth", "truth.json"]);
    assert_eq!(code(&out), 0);
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!(v <= 1e-8, "{v}");

    // Deterministic, traces included, when timing is off.
    let model = read(dir.path(), "model.json");
    tgauge(dir.path(), &["solve", "--samples", "samples.csv", "--shape", "3,3,3", "--trace-out", "trace.jsonl", "--no-timing"]);
    assert_eq!(read(dir.path(), "model.json"), model);
    assert_eq!(read(dir.path(), "trace.jsonl"), trace);
}

#[test]
fn solve_with_large_epsilon_stops_after_initialization() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tgauge(dir.path(), &["gen", "--shape", "4,4", "--terms", "3", "--n", "40"])), 0);
    let out = tgauge(dir.path(), &["solve", "--samples", "samples.csv", "--epsilon", "1000"]);
    assert_eq!(code(&out), 0);
    let line = stdout(&out);
    assert!(line.contains("iterations 0") && line.trim_end().ends_with("terms 1"), "{line}");
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = tgauge(dir.path(), &["solve", "--samples", "nope.csv"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("nope.csv"));

    std::fs::write(dir.path().join("bad.csv"), "x1,x2,y\n1,1,0.5\n2,x,1\n").unwrap();
    let out = tgauge(dir.path(), &["solve", "--samples", "bad.csv"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    assert_eq!(code(&tgauge(dir.path(), &["gen", "--shape", "5,5,5", "--terms", "3", "--n", "200"])), 0);
    let out = tgauge(dir.path(), &["solve", "--samples", "samples.csv", "--max-iterations", "2"]);
    assert_eq!(code(&out), 4, "{}", stdout(&out));
    assert!(stdout(&out).starts_with("status not-converged"));
    let out = tgauge(
        dir.path(),
        &["solve", "--samples", "samples.csv", "--node-budget", "1", "--am-restarts", "0", "--k", "1"],
    );
    assert_eq!(code(&out), 5, "{}", stdout(&out));
    let out = tgauge(dir.path(), &["solve", "--samples", "samples.csv", "--lambda", "-1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn eval_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tgauge(dir.path(), &["gen", "--shape", "4,3,2", "--terms", "4", "--n", "10"])), 0);
    let out = tgauge(dir.path(), &["eval", "--model", "truth.json", "--truth", "truth.json"]);
    assert_eq!(stdout(&out).trim(), "0");

    std::fs::write(dir.path().join("zero.json"), r#"{"shape":[4,3,2],"lambda":1.0,"terms":[]}"#).unwrap();
    let out = tgauge(
        dir.path(),
        &["eval", "--model", "zero.json", "--truth", "truth.json", "--check-dense", "--metrics-out", "m.csv"],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "1\ndense 1\n");
    assert_eq!(read(dir.path(), "m.csv"), "nmse,nmse_dense\n1.0,1.0\n");

    std::fs::write(dir.path().join("other.json"), r#"{"shape":[4,3],"lambda":1.0,"terms":[]}"#).unwrap();
    let out = tgauge(dir.path(), &["eval", "--model", "other.json", "--truth", "truth.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("shape mismatch"));
}

#[test]
fn eval_check_dense_agrees() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tgauge(dir.path(), &["gen", "--shape", "6,5,4", "--terms", "5", "--n", "10", "--truth-out", "a.json"])), 0);
    let out = tgauge(dir.path(), &["gen", "--shape", "6,5,4", "--terms", "3", "--n", "10", "--seed", "9", "--truth-out", "b.json"]);
    assert_eq!(code(&out), 0);
    let out = tgauge(dir.path(), &["eval", "--model", "b.json", "--truth", "a.json", "--check-dense"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    let fact: f64 = lines.next().unwrap().parse().unwrap();
    let dense: f64 = lines.next().unwrap().strip_prefix("dense ").unwrap().parse().unwrap();
    assert!((fact - dense).abs() <= 1e-11 * dense, "{fact} {dense}");
}

#[test]
fn oracle_answers() {
    let dir = tempfile::tempdir().unwrap();
    rank_one(dir.path());
    let out = tgauge(dir.path(), &["oracle", "--samples", "samples.csv", "--model", "truth.json", "--phi", "0.01"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "NoSeparation bound 0\n");

    std::fs::write(dir.path().join("zero.json"), r#"{"shape":[3,3,3],"lambda":1.0,"terms":[]}"#).unwrap();
    let out = tgauge(dir.path(), &["oracle", "--samples", "samples.csv", "--model", "zero.json", "--phi", "0.01"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let gap: f64 = text.lines().next().unwrap().strip_prefix("Separated gap ").unwrap().parse().unwrap();
    assert!(gap > 0.0);
    // The separating vertex is the truth vertex up to sign convention.
    let signs: Vec<Vec<i8>> = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    let truth: serde_json::Value = serde_json::from_str(&read(dir.path(), "truth.json")).unwrap();
    let truth_signs: Vec<Vec<i8>> = serde_json::from_value(truth["terms"][0]["signs"].clone()).unwrap();
    assert_eq!(signs, truth_signs);

    let out = tgauge(
        dir.path(),
        &["oracle", "--samples", "samples.csv", "--model", "zero.json", "--phi", "100", "--node-budget", "0", "--am-restarts", "0"],
    );
    assert_eq!(code(&out), 5, "{}", stdout(&out));
}

#[test]
fn bench_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"shape":[5,5,5],"terms":3,"n":500,"replicates":3,"base_seed":1,"methods":["gauge","als","naive"]}"#;
    std::fs::write(dir.path().join("spec.json"), spec).unwrap();
    let out = tgauge(dir.path(), &["bench", "--spec", "spec.json", "--out-dir", "out", "--no-timing", "--threads", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let agg = read(dir.path(), "out/aggregates.csv");
    let lines: Vec<&str> = agg.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("method,"));
    let trials = read(dir.path(), "out/trials.csv");
    assert_eq!(trials.lines().count(), 10);
    assert!(trials.starts_with("trial,seed,method,nmse,seconds,iterations,oracle_calls"));

    let naive = lines.iter().find(|l| l.starts_with("naive,")).unwrap();
    let median: f64 = naive.split(',').nth(4).unwrap().parse().unwrap();
    assert!((median - 1.0).abs() < 0.1, "{naive}");

    let out = tgauge(dir.path(), &["bench", "--spec", "spec.json", "--out-dir", "out", "--no-timing", "--threads", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(read(dir.path(), "out/aggregates.csv"), agg);
    assert_eq!(read(dir.path(), "out/trials.csv"), trials);

    std::fs::write(dir.path().join("bad.json"), r#"{"shape":[5,5],"n":0}"#).unwrap();
    assert_eq!(code(&tgauge(dir.path(), &["bench", "--spec", "bad.json"])), 2);
    std::fs::write(dir.path().join("broken.json"), "{").unwrap();
    assert_eq!(code(&tgauge(dir.path(), &["bench", "--spec", "broken.json"])), 3);
}
