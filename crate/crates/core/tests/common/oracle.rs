//! Reference implementations shared by the module tests and the
//! acceptance run.

use std::cell::Cell;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recsolve::dsl::print_expr;
use recsolve::eval::{eval_fun, Budget};
use recsolve::linear::ols::ols;
use recsolve::linear::{build_training_set, catalog, cv_lasso, prune, LassoConfig, Tier};
use recsolve::model::{Expr, RecurrenceSystem};
use recsolve::rewrite::simplify;
use recsolve::value::{env_of, eval_bool, eval_guarded, eval_with, Env, EvalError, Num, Semantics};

/// Plain recursion without a memo table, cut off after `left` calls or
/// `depth` nested calls.
pub fn naive(sys: &RecurrenceSystem, f: &str, args: &[BigInt], left: &Cell<u64>, depth: usize) -> Result<Num, EvalError> {
    if left.get() == 0 || depth == 0 {
        return Err(EvalError::BudgetExceeded("naive"));
    }
    left.set(left.get() - 1);
    let def = sys.func(f).unwrap();
    let env: Env = def.params.iter().cloned().zip(args.iter().cloned()).collect();
    let case = def.cases.iter().find(|c| eval_bool(&c.guard, &env).unwrap_or(false)).unwrap();
    eval_with(&case.body, &env, Semantics::Strict, &mut |g, a| naive(sys, g, &a, left, depth - 1))
}

/// All points of `[0, hi]^m`.
pub fn points(m: usize, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out.into_iter().flat_map(|p| (0..=hi).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

/// Memoized and naive evaluation agree on every corpus entry point with
/// coordinates up to `hi` where both finish. Returns the number of points
/// compared. Deep recursion: run on a big stack.
pub fn evaluator_matches_naive(hi: i64) -> Result<usize, String> {
    let mut total = 0;
    for file in super::corpus() {
        let sys = &file.system;
        let f = sys.entry_func();
        let mut compared = 0;
        for p in points(f.params.len(), hi) {
            let args: Vec<BigInt> = p.iter().map(|&v| BigInt::from(v)).collect();
            let env: Env = f.params.iter().cloned().zip(args.iter().cloned()).collect();
            if !eval_bool(&f.pre, &env).unwrap() {
                continue;
            }
            let left = Cell::new(2_000_000);
            let (Ok(fast), Ok(slow)) = (eval_fun(sys, &f.name, &args, Budget::default()), naive(sys, &f.name, &args, &left, 2000))
            else {
                continue;
            };
            let same = if fast.is_exact() && slow.is_exact() { fast == slow } else { fast.approx_eq(&slow, 1e-12) };
            if !same {
                return Err(format!("{} at {p:?}: {} vs {}", file.name, fast.to_f64(), slow.to_f64()));
            }
            compared += 1;
        }
        if compared == 0 && file.name != "q_nonterm" {
            return Err(format!("{}: nothing terminated", file.name));
        }
        total += compared;
    }
    Ok(total)
}

/// Calls act as a fixed but arbitrary integer function of their arguments.
pub fn eval_uninterpreted(e: &Expr, env: &Env) -> Result<Num, EvalError> {
    eval_with(e, env, Semantics::Strict, &mut |name, args| {
        let mut h = name.len() as i64;
        for a in args {
            h = (h * 31 + i64::try_from(a).unwrap_or(0)).rem_euclid(1009);
        }
        Ok(Num::int(h))
    })
}

fn agree(a: &Num, b: &Num) -> bool {
    if a.is_exact() && b.is_exact() {
        a == b
    } else {
        a.approx_eq(b, 1e-9)
    }
}

/// `simplify(e)` is defined and equal wherever `e` is.
pub fn check_sound(e: &Expr, env: &Env) -> Result<(), String> {
    let Ok(before) = eval_uninterpreted(e, env) else { return Ok(()) };
    let s = simplify(e);
    match eval_uninterpreted(&s, env) {
        Ok(after) if agree(&before, &after) => Ok(()),
        other => Err(format!(
            "{} => {} at {env:?}: {} vs {other:?}",
            print_expr(e),
            print_expr(&s),
            before.to_f64()
        )),
    }
}

/// Every body, guard operand and expected piece in the corpus simplifies
/// to something equal at `per_expr` random points in `[0, 40]`.
pub fn rewrite_preserves_corpus(per_expr: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for file in super::corpus() {
        let mut exprs: Vec<Expr> = vec![];
        for f in &file.system.funcs {
            for c in &f.cases {
                exprs.push(c.body.clone());
                exprs.extend(c.guard.exprs().into_iter().cloned());
            }
        }
        if let Some(cf) = &file.expect {
            exprs.extend(cf.pieces.iter().map(|p| p.body.clone()));
        }
        for e in &exprs {
            let vars: Vec<String> = e.free_vars().into_iter().collect();
            for _ in 0..per_expr {
                let env: Env = vars.iter().map(|v| (v.clone(), BigInt::from(rng.gen_range(0..=40)))).collect();
                check_sound(e, &env).map_err(|m| format!("{}: {m}", file.name))?;
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn two_folds(n: usize) -> Vec<Vec<usize>> {
    (0..2).map(|k| (0..n).filter(|i| i % 2 == k).collect()).collect()
}

pub fn xy() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

/// Lasso, prune at 0.05 and refit, as the guess stage does.
pub fn select(feats: &[Expr], params: &[String], inputs: &[Vec<i64>], y: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let ts = build_training_set(feats, params, inputs, y).unwrap();
    assert_eq!(ts.dropped, 0);
    let fit = cv_lasso(&ts.rows, &ts.targets, &two_folds(ts.rows.len()), &LassoConfig::default()).unwrap();
    let keep = prune(&fit.coef, 0.05).unwrap_or_default();
    let (coef, _) = ols(&ts.rows, &ts.targets, &keep);
    (keep, coef)
}

/// Planted sparse model over the first 15 two-variable catalog entries:
/// three features, nonzero integer coefficients in `[-5, 5]`, 100 noiseless
/// samples. Whether support and coefficients (within 1e-3) are recovered.
pub fn planted_trial(seed: u64) -> bool {
    let params = xy();
    let feats: Vec<Expr> = catalog(&params, Tier::Large).into_iter().take(15).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support: Vec<usize> = vec![];
    while support.len() < 3 {
        let j = rng.gen_range(0..feats.len());
        if !support.contains(&j) {
            support.push(j);
        }
    }
    support.sort();
    let coefs: Vec<i64> = (0..3)
        .map(|_| loop {
            let c = rng.gen_range(-5..=5);
            if c != 0 {
                break c;
            }
        })
        .collect();
    let inputs: Vec<Vec<i64>> = (0..100).map(|_| vec![rng.gen_range(1..=20), rng.gen_range(1..=20)]).collect();
    let y: Vec<f64> = inputs
        .iter()
        .map(|p| {
            let env = env_of(&params, p);
            support.iter().zip(&coefs).map(|(&j, &c)| c as f64 * eval_guarded(&feats[j], &env).unwrap().to_f64()).sum()
        })
        .collect();
    let (keep, coef) = select(&feats, &params, &inputs, &y);
    keep == support && coef.iter().zip(&coefs).all(|(a, &b)| (a - b as f64).abs() <= 1e-3)
}
