#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use proptest::prelude::*;
use recsolve::dsl::{parse_file, BenchmarkFile};
use recsolve::harness::corpus_files;
use recsolve::model::Expr;
use recsolve::smt::SolverConfig;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

pub fn corpus() -> Vec<BenchmarkFile> {
    corpus_files(&corpus_dir()).unwrap().iter().map(|p| parse_file(p).unwrap()).collect()
}

/// The configured solver answers a trivial query.
pub fn solver_available() -> bool {
    let cfg = SolverConfig::resolve(None);
    recsolve::smt::solver::run("(check-sat)\n", &cfg, "probe").is_ok()
}

fn leaf(vars: &'static [&'static str]) -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-6i64..=6).prop_map(Expr::int),
        (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Expr::rat(n, d)),
        proptest::sample::select(vars).prop_map(Expr::var),
    ]
}

/// Call-free expressions over `vars`.
pub fn expr(vars: &'static [&'static str], depth: u32) -> impl Strategy<Value = Expr> {
    leaf(vars).prop_recursive(depth, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            (inner.clone(), 0i64..=3).prop_map(|(a, k)| Expr::pow(a, Expr::int(k))),
            inner.clone().prop_map(|a| Expr::pow(Expr::int(2), a)),
            inner.clone().prop_map(Expr::floor),
            inner.clone().prop_map(Expr::ceil),
            inner.clone().prop_map(Expr::log2),
            inner.clone().prop_map(Expr::fact),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::max(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::min(a, b)),
        ]
    })
}

pub fn bench(name: &str) -> BenchmarkFile {
    corpus().into_iter().find(|f| f.name == name).unwrap_or_else(|| panic!("no corpus file {name}"))
}

/// Symbolic regression on `2^(x+y)` data with operators `+`, `*`, `2^`:
/// whether the run's candidate matches the data exactly.
pub fn exp_run_is_exact(seed: u64) -> bool {
    use recsolve::harness::classify::grid_equal;
    use recsolve::symreg::{guess_symbolic, BinOp, GpConfig, OperatorSet, UnOp};
    let file = bench("exp3");
    let f = file.system.entry_func();
    let ops = OperatorSet { binary: vec![BinOp::Add, BinOp::Mul], unary: vec![UnOp::Exp2] };
    let sample = recsolve::sample::SampleConfig { seed, ..Default::default() };
    let g = guess_symbolic(&file.system, f, &sample, &ops, &GpConfig { seed, ..Default::default() }, false);
    let grid: Vec<Vec<num_bigint::BigInt>> =
        (0..12i64).flat_map(|x| (0..12i64).map(move |y| vec![x.into(), y.into()])).collect();
    g.candidate.score == 1.0 && grid_equal(&g.candidate, file.expect.as_ref().unwrap(), &grid)
}

/// Symbolic regression on the `x > 1` piece of Fibonacci. Returns the
/// growth ratios `e(31)/e(30)` of the front entries with test R^2 of at
/// least 0.999.
pub fn fib_growth(seed: u64) -> Vec<f64> {
    use recsolve::guess::{r_squared, regions};
    use recsolve::sample::{build_dataset, choose_bound, SampleConfig};
    use recsolve::symreg::{evolve, GpConfig, OperatorSet};
    let file = bench("fib");
    let f = file.system.entry_func();
    let cfg = SampleConfig { seed, ..Default::default() };
    let regs = regions(f, true);
    let (i, (_, constraint, positive)) =
        regs.iter().enumerate().find(|(_, r)| r.0.to_string() == "x > 1").expect("x > 1 piece");
    let bound = choose_bound(&file.system, f, &cfg).bound;
    let Ok(ds) = build_dataset(&file.system, f, constraint, *positive, bound, &cfg, i as u64 + 1) else {
        return vec![];
    };
    let xs: Vec<Vec<f64>> = ds.train_x.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let front = evolve(&xs, &ds.train_y, &OperatorSet::default(), &GpConfig { seed, ..Default::default() }, 1);
    let (sx, sy) = ds.score_rows();
    let fx: Vec<Vec<f64>> = sx.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    front
        .entries
        .iter()
        .map(|e| (r_squared(&fx.iter().map(|x| e.tree.eval(x)).collect::<Vec<_>>(), sy), e))
        .filter(|(r2, _)| *r2 >= 0.999)
        .map(|(_, e)| e.tree.eval(&[31.0]) / e.tree.eval(&[30.0]))
        .collect()
}
