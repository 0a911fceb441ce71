mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use recsolve::dsl::parse;
use recsolve::eval::{eval_batch, eval_fun, Budget, Evaluator};
use recsolve::value::{eval_ground, Env, EvalError, Num};

use common::oracle;

#[test]
fn memoized_matches_naive_on_corpus() {
    let n = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(|| oracle::evaluator_matches_naive(10))
        .unwrap()
        .join()
        .unwrap()
        .unwrap();
    assert!(n > 1000, "{n} points");
}

#[test]
fn non_terminating_cost_exhausts_budget() {
    let file = parse(&std::fs::read_to_string(common::corpus_dir().join("q_nonterm.rec")).unwrap()).unwrap();
    let f = file.system.entry_func();
    for x in 1..=5 {
        let r = eval_fun(&file.system, &f.name, &[BigInt::from(x)], Budget::default());
        assert!(matches!(r, Err(EvalError::BudgetExceeded(_))), "x={x}: {r:?}");
    }
}

#[test]
fn nested_example_values() {
    let file = parse("def f(x) pre x >= 0 { case x = 0 -> 0 case x > 0 -> f(f(x - 1)) + 1 }\nentry f").unwrap();
    let mut ev = Evaluator::new(&file.system, Budget::default());
    for x in 0..50 {
        assert_eq!(ev.eval_fun("f", &[BigInt::from(x)]).unwrap(), Num::int(x));
    }
}

#[test]
fn precondition_and_missing_case() {
    let file = parse("def f(x) pre x >= 0 { case x > 3 -> 1 }\nentry f").unwrap();
    assert_eq!(eval_fun(&file.system, "f", &[BigInt::from(-1)], Budget::default()), Err(EvalError::Precondition));
    assert!(matches!(
        eval_fun(&file.system, "f", &[BigInt::from(1)], Budget::default()),
        Err(EvalError::NoMatchingCase { .. })
    ));
}

#[test]
fn depth_budget() {
    let file = parse("def f(x) pre x >= 0 { case x = 0 -> 0 case x > 0 -> f(x - 1) + 1 }\nentry f").unwrap();
    let budget = Budget { max_depth: 100, ..Default::default() };
    assert!(matches!(eval_fun(&file.system, "f", &[BigInt::from(1000)], budget), Err(EvalError::BudgetExceeded(_))));
    // Deep but within the default budget: no stack overflow.
    assert_eq!(eval_fun(&file.system, "f", &[BigInt::from(5000)], Budget::default()).unwrap(), Num::int(5000));
}

#[test]
fn batch_shares_results() {
    let file = parse("def f(x) pre x >= 0 { case x <= 1 -> x case x > 1 -> f(x - 1) + f(x - 2) }\nentry f").unwrap();
    let pts: Vec<Vec<i64>> = (0..60).map(|x| vec![x]).collect();
    let (vals, timed_out) = eval_batch(&file.system, "f", &pts, Budget::default());
    assert!(!timed_out);
    assert_eq!(vals[59].as_ref().unwrap(), &Num::int(956722026041));
}

#[test]
fn overflow_is_an_error() {
    let env: Env = [("x".to_string(), BigInt::from(100_000))].into_iter().collect();
    let e = recsolve::dsl::parse_expr("2^x").unwrap();
    assert_eq!(eval_ground(&e, &env), Err(EvalError::Overflow));
}

proptest! {
    // Exact arithmetic agrees with doubles wherever the result is small.
    #[test]
    fn exact_tracks_float(e in common::expr(&["x", "y"], 3), x in 0i64..12, y in 0i64..12) {
        let env: Env = [("x".to_string(), BigInt::from(x)), ("y".to_string(), BigInt::from(y))].into_iter().collect();
        if let Ok(v) = eval_ground(&e, &env) {
            let f = float_eval(&e, x as f64, y as f64);
            if f.is_finite() && f.abs() < 1e12 {
                prop_assert!(v.approx_eq(&Num::Approx(f), 1e-6) || (v.to_f64() - f).abs() < 1e-6, "{} vs {}", v.to_f64(), f);
            }
        }
    }
}

fn float_eval(e: &recsolve::model::Expr, x: f64, y: f64) -> f64 {
    use recsolve::model::Expr::*;
    let go = |a: &recsolve::model::Expr| float_eval(a, x, y);
    match e {
        Const(c) => num_traits::ToPrimitive::to_f64(c).unwrap(),
        Var(v) => if v == "x" { x } else { y },
        Add(a, b) => go(a) + go(b),
        Sub(a, b) => go(a) - go(b),
        Mul(a, b) => go(a) * go(b),
        Div(a, b) => go(a) / go(b),
        Pow(a, b) => go(a).powf(go(b)),
        Floor(a) => go(a).floor(),
        Ceil(a) => go(a).ceil(),
        Log2(a) => go(a).log2(),
        Factorial(a) => (1..=go(a) as u64).map(|k| k as f64).product(),
        Max(a, b) => go(a).max(go(b)),
        Min(a, b) => go(a).min(go(b)),
        Call(..) => f64::NAN,
    }
}
