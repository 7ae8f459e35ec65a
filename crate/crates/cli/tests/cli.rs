use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

use tristream::oracles::graph_stats;
use tristream::stream::{materialize, normalize_event, parse_stream};
use tristream::StreamConfig;

fn tristream(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tristream"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tristream"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn error(o: &Output, code: i32) -> Value {
    assert_eq!(o.status.code(), Some(code), "stdout: {}", stdout(o));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    err["error"].clone()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn gen_file(dir: &TempDir, name: &str, args: &[&str]) -> String {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    let out = tristream(&full);
    assert!(out.status.success());
    write(dir, name, &stdout(&out))
}

fn event_lines(text: &str, sign: char) -> usize {
    text.lines().filter(|l| l.starts_with(sign)).count()
}

#[test]
fn gen_complete_graph() {
    let text = stdout(&tristream(&["gen", "complete", "4"]));
    assert_eq!(event_lines(&text, '+'), 6);
    assert_eq!(event_lines(&text, '-'), 0);
}

#[test]
fn gen_with_churn_keeps_final_graph() {
    let dir = TempDir::new().unwrap();
    let path = gen_file(&dir, "k4.txt", &["complete", "4", "--delete-fraction", "0.5", "--seed", "1"]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(event_lines(&text, '+'), 9);
    assert_eq!(event_lines(&text, '-'), 3);
    let v = json(&tristream(&["exact", &path]));
    assert_eq!(v["T3"], 4);
    assert_eq!(v["P2"], 12);
    assert_eq!(v["alpha"], 1.0);
    assert_eq!(v["m"], 6);
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let a = stdout(&tristream(&["gen", "gnp", "30", "0.2", "--seed", "2"]));
    let b = stdout(&tristream(&["gen", "gnp", "30", "0.2", "--seed", "2"]));
    assert_eq!(a, b);

    let raw = parse_stream(&a).unwrap();
    let events: Vec<_> = raw
        .iter()
        .map(|r| normalize_event(30, r.u, r.v, r.sign).unwrap())
        .collect();
    let g = materialize(&events, StreamConfig::new(30, usize::MAX).unwrap()).unwrap();
    let want = graph_stats(&g);

    let v = json(&with_stdin(&["exact", "-", "--n", "30"], &a));
    assert_eq!(v["T3"], want.t3);
    assert_eq!(v["P2"], want.p2);
    assert_eq!(v["F2"], want.f2);
    assert_eq!(v["m"], want.m);
}

#[test]
fn gen_rejects_bad_parameters() {
    assert_eq!(error(&tristream(&["gen", "gnp", "30", "1.5"]), 2)["kind"], "invalid_argument");
    assert_eq!(error(&tristream(&["gen", "complete", "4", "--delete-fraction", "1"]), 2)["kind"], "invalid_argument");
    assert_eq!(error(&tristream(&["gen", "bipartite-complete", "3"]), 2)["kind"], "invalid_argument");
}

#[test]
fn exact_examples() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "path.txt", "+ 1 2\n+ 2 3\n");
    let v = json(&tristream(&["exact", &path]));
    assert_eq!((v["T3"].as_u64(), v["P2"].as_u64(), v["alpha"].as_f64()), (Some(0), Some(1), Some(0.0)));

    let bull = write(&dir, "bull.txt", "+ 1 2\n+ 2 3\n+ 1 3\n+ 1 4\n+ 2 5\n");
    let v = json(&tristream(&["exact", &bull]));
    assert_eq!(v["T3"], 1);
    assert_eq!(v["P2"], 7);
    assert!((v["alpha"].as_f64().unwrap() - 3.0 / 7.0).abs() < 1e-12);
    assert_eq!(v["n_touched"], 5);
}

#[test]
fn outputs_carry_provenance_and_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let k = gen_file(&dir, "k8.txt", &["complete", "8"]);
    let args = ["estimate", "--epsilon", "0.5", "--delta", "0.5", "--k-override", "20", "--seed", "5", &k];
    let a = tristream(&args);
    let b = tristream(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    for key in ["command", "seed", "config", "version"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["p2_hat", "alpha_hat", "t3_hat", "ell", "K", "s", "p", "colors", "diagnostics", "warnings"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "estimate");
    assert_eq!(v["seed"], 5);
    assert_eq!(v["K"], 20);
    assert_eq!(v["diagnostics"].as_array().unwrap().len(), 20);
}

#[test]
fn estimate_k20() {
    let dir = TempDir::new().unwrap();
    let k = gen_file(&dir, "k20.txt", &["complete", "20"]);
    let args = [
        "estimate", "--epsilon", "0.3", "--delta", "0.2", "--alpha-min", "1", "--n", "20", "--m-max", "200",
        "--seed", "7", &k,
    ];
    let v = json(&tristream(&args));
    let t3 = v["t3_hat"].as_f64().unwrap();
    assert!((t3 - 1140.0).abs() <= 0.3 * 1140.0, "t3_hat {t3}");
    assert_eq!(v["alpha_hat"], 1.0);
}

#[test]
fn estimate_errors() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.txt", "# nothing here\n");
    let e = error(&tristream(&["estimate", &empty]), 2);
    assert_eq!(e["kind"], "empty_stream");
    assert_eq!(e["message"], "empty stream");

    let dangling = write(&dir, "dangling.txt", "+ 1 2\n+ 2 3\n- 1 3\n");
    let e = error(&tristream(&["estimate", &dangling]), 2);
    assert_eq!(e["kind"], "turnstile");
    assert_eq!(e["line"], 3);

    let garbled = write(&dir, "garbled.txt", "+ 1 2\n* 2 3\n");
    let e = error(&tristream(&["exact", &garbled]), 2);
    assert_eq!(e["kind"], "parse");
    assert_eq!(e["line"], 2);

    let path = write(&dir, "p3.txt", "+ 1 2\n+ 2 3\n");
    let e = error(&tristream(&["estimate", "--s-override", "5", "--k-override", "3", &path]), 3);
    assert_eq!(e["kind"], "no_qualified_copies");

    let e = error(&tristream(&["estimate", "--epsilon", "0", &path]), 2);
    assert_eq!(e["kind"], "invalid_argument");
    let e = error(&tristream(&["estimate", "--epsilon", "0.5", "missing.txt"]), 2);
    assert_eq!(e["kind"], "io");
}

#[test]
fn doulion_examples() {
    let dir = TempDir::new().unwrap();
    let k10 = gen_file(&dir, "k10.txt", &["complete", "10"]);
    let v = json(&tristream(&["doulion", "--p", "1.0", &k10]));
    assert_eq!(v["estimate"], 120.0);

    let v = json(&tristream(&["doulion", "--p", "0.5", "--trials", "1000", &k10]));
    let mean = v["mean"].as_f64().unwrap();
    assert!((mean - 120.0).abs() <= 6.0, "mean {mean}");

    let e = error(&tristream(&["doulion", "--p", "0", &k10]), 2);
    assert_eq!(e["kind"], "invalid_argument");
}

#[test]
fn verify_lemmas_examples() {
    let v = json(&tristream(&["verify-lemmas", "--sweep", "1000", "--seed", "3"]));
    assert_eq!(v["violations"], 0);
    assert_eq!(v["graphs"], 1000);

    let dir = TempDir::new().unwrap();
    let tree = gen_file(&dir, "path10.txt", &["path", "10"]);
    let v = json(&tristream(&["verify-lemmas", &tree]));
    assert_eq!(v["bound_L3_satisfied"], true);
    assert_eq!(v["bound_L3"], 4);

    let k33 = gen_file(&dir, "k33.txt", &["bipartite-complete", "3", "3"]);
    let v = json(&tristream(&["verify-lemmas", &k33]));
    assert_eq!(v["bound_L4_satisfied"], true);

    let split = write(&dir, "split.txt", "+ 1 2\n+ 2 3\n+ 4 5\n+ 5 6\n");
    assert_eq!(error(&tristream(&["verify-lemmas", &split]), 2)["kind"], "precondition");
}

#[test]
fn human_format_shows_fields() {
    let dir = TempDir::new().unwrap();
    let k4 = gen_file(&dir, "k4.txt", &["complete", "4"]);
    let out = stdout(&tristream(&["exact", "--format", "human", &k4]));
    assert!(out.lines().any(|l| l == "T3: 4"), "{out}");
    assert!(out.lines().any(|l| l == "command: exact"));
    assert!(Path::new(&k4).exists());
}
