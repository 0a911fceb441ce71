mod common;

use std::process::{Command, Output};

fn recsolve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recsolve")).args(args).output().unwrap()
}

fn corpus(name: &str) -> String {
    common::corpus_dir().join(format!("{name}.rec")).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_prints_a_candidate() {
    let o = recsolve(&["solve", &corpus("plus_one"), "--seed", "4", "--repeat", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("1*n + 1"), "{out}");
    assert!(out.contains("classification: exact"), "{out}");
}

#[test]
fn usage_errors_exit_with_one() {
    let plus = corpus("plus_one");
    for args in [
        vec!["solve"],
        vec!["frobnicate"],
        vec!["solve", "/no/such/file.rec"],
        vec!["solve", &plus, "--method", "bogus"],
        vec!["solve", &plus, "--lambda-grid", "1:0:5"],
        vec!["solve", &plus, "--bound", "many"],
        vec!["check", &plus],
        vec!["check", &plus, "--candidate", "n +"],
    ] {
        let o = recsolve(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn syntax_errors_name_the_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.rec");
    std::fs::write(&bad, "def f(x) {\n  case x = 0 -> \n}\n").unwrap();
    let o = recsolve(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3:1"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_solver_is_an_internal_error() {
    let o = recsolve(&["solve", &corpus("plus_one"), "--verify", "--solver", "recsolve-no-such-solver", "--repeat", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_verdicts() {
    if !common::solver_available() {
        return;
    }
    let o = recsolve(&["check", &corpus("nested"), "--candidate", "x"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"proved\""));
    let o = recsolve(&["check", &corpus("nested"), "--candidate", "x + 1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"disproved\""));
}

#[test]
fn corpus_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_dir = dir.path().join("c");
    std::fs::create_dir(&corpus_dir).unwrap();
    for n in ["plus_one", "min_det"] {
        std::fs::copy(corpus(n), corpus_dir.join(format!("{n}.rec"))).unwrap();
    }
    let json = dir.path().join("r.jsonl");
    let o = recsolve(&["corpus", corpus_dir.to_str().unwrap(), "--out", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&json).unwrap();
    assert_eq!(text.lines().count(), 4);
    let csv = dir.path().join("r.csv");
    let o = recsolve(&["corpus", corpus_dir.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("format-version,name"));
}

#[test]
fn empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.jsonl");
    let o = recsolve(&["corpus", dir.path().to_str().unwrap(), "--out", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.lines().last().unwrap().contains("\"total\":0"));
}

#[test]
fn debug_smt_keeps_queries() {
    if !common::solver_available() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.jsonl");
    let o = recsolve(&["check", &corpus("plus_one"), "--candidate", "n + 1", "--debug-smt", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let smt = walk(dir.path()).into_iter().filter(|p| p.extension().is_some_and(|e| e == "smt2")).count();
    assert!(smt >= 1);
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = vec![];
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}
