mod common;

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recsolve::dsl::{parse_bool, parse_expr};
use recsolve::model::{BoolExpr, Expr};
use recsolve::rewrite::{entails, is_unsat, simplify, simplify_bool};
use recsolve::value::{eval_bool, Env};

use common::oracle::{self, check_sound};

fn env_xy(x: i64, y: i64) -> Env {
    [("x".to_string(), BigInt::from(x)), ("y".to_string(), BigInt::from(y))].into_iter().collect()

}

#[test]
fn exponential_identity() {
    assert_eq!(simplify(&parse_expr("2^(x + 1) - 2 * 2^x").unwrap()), Expr::int(0));
    assert_eq!(simplify(&parse_expr("4^x - 2^(2*x)").unwrap()), Expr::int(0));
    assert_eq!(simplify(&parse_expr("2^x * 2^y - 2^(x + y)").unwrap()), Expr::int(0));
}

#[test]
fn polynomial_normal_form() {
    let a = simplify(&parse_expr("(x + 1)^2").unwrap());
    let b = simplify(&parse_expr("x^2 + 2*x + 1").unwrap());
    assert_eq!(a, b);
    assert_eq!(simplify(&parse_expr("x*y - y*x").unwrap()), Expr::int(0));
    assert_eq!(simplify(&parse_expr("max(x, x)").unwrap()), Expr::var("x"));
    assert_eq!(simplify(&parse_expr("floor(x)").unwrap()), Expr::var("x"));
}

#[test]
fn corpus_expressions_are_preserved() {
    oracle::rewrite_preserves_corpus(1000, 42).unwrap();
}

#[test]
fn guards_keep_their_truth_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for file in common::corpus() {
        for f in &file.system.funcs {
            let guards: Vec<BoolExpr> = f.cases.iter().map(|c| c.guard.clone()).chain([f.pre.clone()]).collect();
            for g in guards {
                let s = simplify_bool(&g);
                for _ in 0..1000 {
                    let env: Env = f.params.iter().map(|v| (v.clone(), BigInt::from(rng.gen_range(0..=40)))).collect();
                    assert_eq!(eval_bool(&g, &env).ok(), eval_bool(&s, &env).ok(), "{}: {g:?}", file.name);
                }
            }
        }
    }
}

#[test]
fn entailment_and_unsat() {
    let b = |s: &str| parse_bool(s).unwrap();
    assert!(entails(&b("x > 0 and y > 0"), &b("x >= 1")));
    assert!(entails(&b("x >= 3"), &b("x - 1 >= 0")));
    assert!(!entails(&b("x >= 0"), &b("x > 0")));
    assert!(is_unsat(&b("x > 0 and x < 1")));
    assert!(is_unsat(&b("x = 0 and x > 0")));
    assert!(!is_unsat(&b("x >= 0 and y = x")));
}

fn construct(kind: usize, a: Expr, b: Expr) -> Expr {
    match kind {
        0 => a + b,
        1 => a - b,
        2 => a * b,
        3 => a / b,
        4 => Expr::pow(a, Expr::int(2)),
        5 => Expr::pow(Expr::int(2), a) * Expr::pow(Expr::int(4), b),
        6 => Expr::floor(a / Expr::int(2)),
        7 => Expr::ceil(a / Expr::int(3)),
        8 => Expr::log2(Expr::pow(Expr::int(2), a) * Expr::int(8)),
        9 => Expr::max(a, b),
        10 => Expr::min(a, b),
        _ => Expr::fact(a),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn simplify_is_sound(e in common::expr(&["x", "y"], 4), x in 0i64..25, y in 0i64..25) {
        check_sound(&e, &env_xy(x, y)).map_err(TestCaseError::fail)?;
    }

    // One construct at the root over random operands, so that each
    // normalization path is exercised on its own.
    #[test]
    fn simplify_is_sound_per_construct(
        kind in 0usize..12,
        a in common::expr(&["x", "y"], 2),
        b in common::expr(&["x", "y"], 2),
        x in 0i64..25,
        y in 0i64..25,
    ) {
        check_sound(&construct(kind, a, b), &env_xy(x, y)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn simplify_is_idempotent(e in common::expr(&["x", "y"], 4)) {
        let once = simplify(&e);
        prop_assert_eq!(simplify(&once), once);
    }

    // Incomplete, but never wrong.
    #[test]
    fn entailment_is_sound(
        lo in 0i64..6, hi in 0i64..12, k in 0i64..12, op in 0usize..4,
    ) {
        let ops = [">=", ">", "<=", "!="];
        let hyp = parse_bool(&format!("x >= {lo} and x <= {hi}")).unwrap();
        let goal = parse_bool(&format!("x {} {k}", ops[op])).unwrap();
        if entails(&hyp, &goal) {
            for x in lo..=hi {
                prop_assert!(eval_bool(&goal, &env_xy(x, 0)).unwrap(), "x = {x}");
            }
        }
    }

    #[test]
    fn simplify_bool_is_sound(
        a in common::expr(&["x", "y"], 2),
        b in common::expr(&["x", "y"], 2),
        op in 0usize..6,
        x in 0i64..25,
        y in 0i64..25,
    ) {
        use recsolve::model::CmpOp::*;
        let op = [Lt, Le, Gt, Ge, Eq, Ne][op];
        let g = BoolExpr::cmp(op, a, b);
        let env = env_xy(x, y);
        if let Ok(v) = eval_bool(&g, &env) {
            prop_assert_eq!(eval_bool(&simplify_bool(&g), &env), Ok(v));
        }
    }
}
