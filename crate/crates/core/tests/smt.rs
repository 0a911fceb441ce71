mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use proptest::prelude::*;
use recsolve::dsl::{parse, parse_candidate, BenchmarkFile};
use recsolve::smt::solver::{interpret, parse_model, run};
use recsolve::smt::{verify, Answer, SmtError, SolverConfig, Verification};

use common::bench;

fn check(file: &BenchmarkFile, text: &str) -> (Verification, Duration) {
    let cand = parse_candidate(text, &file.system.entry_func().params).unwrap();
    let t = Instant::now();
    let rep = verify(&file.system, &cand, &SolverConfig::resolve(None));
    (rep.result, t.elapsed())
}

fn fake(script: &str) -> SolverConfig {
    SolverConfig {
        command: vec!["sh".into(), "-c".into(), script.into()],
        timeout: Duration::from_millis(300),
        debug_dir: None,
    }
}

#[test]
fn solver_output_is_interpreted() {
    assert_eq!(interpret("unsat\n").unwrap(), Answer::Unsat);
    assert_eq!(interpret("unknown\n").unwrap(), Answer::Unknown("solver-unknown".into()));
    let sat = interpret("sat\n(\n  (define-fun x_0 () Int 3)\n  (define-fun y_0 () Int (- 7))\n)\n").unwrap();
    let Answer::Sat(m) = sat else { panic!("expected sat") };
    assert_eq!(m["x_0"], BigInt::from(3));
    assert_eq!(m["y_0"], BigInt::from(-7));
    assert!(matches!(interpret("(error \"boom\")"), Err(SmtError::MalformedSolverOutput(_))));
}

#[test]
fn older_model_syntax() {
    let m = parse_model("(model (define-fun n () Int 12) (define-fun r () Real 1.5))").unwrap();
    assert_eq!(m.len(), 1);
    assert_eq!(m["n"], BigInt::from(12));
}

#[test]
fn driver_without_a_solver() {
    let cfg = SolverConfig { command: vec!["recsolve-no-such-solver".into()], ..Default::default() };
    assert!(matches!(run("(check-sat)\n", &cfg, "t"), Err(SmtError::SolverNotFound(..))));
    let file = bench("plus_one");
    let cand = parse_candidate("n + 1", &file.system.entry_func().params).unwrap();
    match verify(&file.system, &cand, &cfg).result {
        Verification::Unknown { reason } => assert!(reason.starts_with("solver error"), "{reason}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn driver_kills_slow_solvers() {
    let t = Instant::now();
    let ans = run("(check-sat)\n", &fake("exec sleep 5"), "t").unwrap();
    assert_eq!(ans, Answer::Unknown("timeout".into()));
    assert!(t.elapsed() < Duration::from_secs(3));
}

#[test]
fn driver_reads_scripted_answers() {
    assert_eq!(run("", &fake("echo unsat"), "t").unwrap(), Answer::Unsat);
    let ans = run("", &fake("printf 'sat\\n((define-fun n_0 () Int 4))\\n'"), "t").unwrap();
    assert!(matches!(ans, Answer::Sat(m) if m.values().next() == Some(&BigInt::from(4))));
    let ans = run("", &fake("exit 3"), "t").unwrap();
    assert!(matches!(ans, Answer::Unknown(r) if r.starts_with("solver crashed")));
}

#[test]
fn debug_directory_receives_queries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SolverConfig { debug_dir: Some(dir.path().to_path_buf()), ..fake("echo unsat") };
    run("(check-sat)\n", &cfg, "probe").unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join("probe.smt2")).unwrap(), "(check-sat)\n");
}

#[test]
fn calls_outside_the_supported_fragment() {
    // No solver is consulted for these.
    let file = parse(
        "def f(x) pre x >= 0 {
           case x = 0 -> 1
           case x > 0 -> x * f(x - 1)
         }
         entry f",
    )
    .unwrap();
    let cand = parse_candidate("x!", &file.system.entry_func().params).unwrap();
    let cfg = SolverConfig { command: vec!["recsolve-no-such-solver".into()], ..Default::default() };
    assert!(matches!(verify(&file.system, &cand, &cfg).result, Verification::Unsupported { .. }));
}

#[test]
fn known_solutions_are_proved() {
    if !common::solver_available() {
        eprintln!("no SMT solver available; skipping");
        return;
    }
    for (name, sol) in [("nested", "x"), ("plus_one", "n + 1"), ("max_det", "2 * x"), ("min_det", "x")] {
        let (v, took) = check(&bench(name), sol);
        assert_eq!(v, Verification::Proved, "{name}: {sol}");
        assert!(took <= Duration::from_secs(10), "{name} took {took:?}");
    }
    let merge = "piece x > 0 and y > 0 -> x + y - 1\npiece true -> 0";
    assert_eq!(check(&bench("merge"), merge).0, Verification::Proved);
}

#[test]
fn wrong_solution_has_a_confirmed_counterexample() {
    if !common::solver_available() {
        eprintln!("no SMT solver available; skipping");
        return;
    }
    let (v, took) = check(&bench("nested"), "x + 1");
    match v {
        Verification::Disproved { counterexample, confirmed } => {
            assert_eq!(counterexample["x"], BigInt::from(0));
            assert!(confirmed);
        }
        other => panic!("{other:?}"),
    }
    assert!(took <= Duration::from_secs(10));
    assert!(!check(&bench("max_det"), "x").0.is_proved());
    assert!(!check(&bench("merge"), "x + y - 1").0.is_proved());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    // Affine guesses for n + 1: only the right one is proved and every
    // counterexample is a real disagreement.
    #[test]
    fn verdicts_agree_with_evaluation(a in -3i64..=3, b in -3i64..=3) {
        if !common::solver_available() {
            return Ok(());
        }
        let file = bench("plus_one");
        let (v, _) = check(&file, &format!("{a} * n + {b}"));
        match v {
            Verification::Proved => prop_assert!(a == 1 && b == 1),
            Verification::Disproved { confirmed, .. } => {
                prop_assert!(confirmed);
                prop_assert!(!(a == 1 && b == 1));
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }
}
