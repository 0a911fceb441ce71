mod common;

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recsolve::dsl::{parse, parse_expr};
use recsolve::linear::{
    build_training_set, catalog, cv_lasso, guess_linear, lambda_grid, prune, rationalize_f64, GuessConfig, LassoConfig,
    Tier,
};
use recsolve::model::Expr;
use recsolve::sample::SampleConfig;

use common::oracle::{planted_trial, select, two_folds, xy};

#[test]
fn planted_support_recovery() {
    let hits = (0..50).filter(|&s| planted_trial(s)).count();
    println!("recovered {hits}/50");

    assert!(hits >= 45, "recovered {hits}/50");
}

#[test]
fn quadratic_on_small_catalog() {
    let params = vec!["x".to_string()];
    let feats = vec![parse_expr("x").unwrap(), parse_expr("x^2").unwrap(), parse_expr("ceil(log2(x))").unwrap()];
    let inputs: Vec<Vec<i64>> = (1..=50).map(|x| vec![x]).collect();
    let y: Vec<f64> = (1..=50).map(|x| 2.0 * (x * x) as f64 + 3.0).collect();
    let (keep, coef) = select(&feats, &params, &inputs, &y);
    assert_eq!(keep, vec![1]);
    assert!((coef[0] - 2.0).abs() < 1e-3);
}

#[test]
fn constant_targets() {
    let params = vec!["x".to_string()];
    let feats = catalog(&params, Tier::Medium);
    let inputs: Vec<Vec<i64>> = (1..=30).map(|x| vec![x]).collect();
    let ts = build_training_set(&feats, &params, &inputs, &[7.0; 30]).unwrap();
    let fit = cv_lasso(&ts.rows, &ts.targets, &two_folds(30), &LassoConfig::default()).unwrap();
    assert!(fit.coef.iter().all(|c| *c == 0.0));
    assert!((fit.intercept - 7.0).abs() < 1e-12);
}

#[test]
fn guarded_features_at_zero() {
    let params = vec!["x".to_string()];
    let feats = vec![parse_expr("x").unwrap(), parse_expr("ceil(log2(x))").unwrap()];
    let ts = build_training_set(&feats, &params, &[vec![0], vec![1]], &[0.0, 1.0]).unwrap();
    assert_eq!(ts.rows, vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
    assert_eq!(ts.dropped, 0);
}

#[test]
fn catalogs_are_nested_and_distinct() {
    for m in 1..=4 {
        let params: Vec<String> = (0..m).map(|i| format!("v{i}")).collect();
        let mut prev: Vec<Expr> = vec![];
        for tier in Tier::ALL {
            let c = catalog(&params, tier);
            let set: std::collections::BTreeSet<_> = c.iter().collect();
            assert_eq!(set.len(), c.len(), "duplicates at m={m} {tier:?}");
            assert!(prev.iter().all(|e| c.contains(e)), "m={m} {tier:?} drops features");
            assert!(c.len() <= 60);
            prev = c;
        }
    }
}

#[test]
fn worked_example_features() {
    // Row for input 5 over a catalog starting x, x^2, x^3, ceil(log2 x).
    let params = vec!["x".to_string()];
    let feats: Vec<Expr> = ["x", "x^2", "x^3", "ceil(log2(x))"].iter().map(|s| parse_expr(s).unwrap()).collect();
    let ts = build_training_set(&feats, &params, &[vec![5]], &[5.0]).unwrap();
    assert_eq!(ts.rows[0], vec![5.0, 25.0, 125.0, 3.0]);
}

#[test]
fn desk_scale_fits_are_fast() {
    // 100 rows and the largest two-variable catalog.
    let params = xy();
    let feats = catalog(&params, Tier::Large);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inputs: Vec<Vec<i64>> = (0..100).map(|_| vec![rng.gen_range(1..=20), rng.gen_range(1..=20)]).collect();
    let y: Vec<f64> = inputs.iter().map(|p| (p[0] * p[1]) as f64 + rng.gen_range(0.0..1.0)).collect();
    let ts = build_training_set(&feats, &params, &inputs, &y).unwrap();
    let t = Instant::now();
    cv_lasso(&ts.rows, &ts.targets, &two_folds(ts.rows.len()), &LassoConfig::default()).unwrap();
    assert!(t.elapsed().as_secs_f64() <= 10.0, "{:?}", t.elapsed());
}

#[test]
fn guess_nested_example() {
    let file = parse("def f(x) pre x >= 0 { case x = 0 -> 0 case x > 0 -> f(f(x - 1)) + 1 }\nentry f").unwrap();
    for seed in 0..3 {
        let scfg = SampleConfig { seed, ..Default::default() };
        let g = guess_linear(&file.system, file.system.entry_func(), &scfg, &GuessConfig::default(), false);
        assert_eq!(g.candidate.score, 1.0);
        assert_eq!(g.candidate.pieces[0].body, Expr::Const(BigRational::from_integer(BigInt::from(1))) * Expr::var("x"));
    }
}

#[test]
fn rationalize_examples() {
    let r = |v: f64| rationalize_f64(v, 64, 1e-4);
    assert_eq!(r(0.9999997), Some(BigRational::from_integer(1.into())));
    assert_eq!(r(0.3333333), Some(BigRational::new(1.into(), 3.into())));
    assert_eq!(r(-2.5), Some(BigRational::new((-5).into(), 2.into())));
    assert_eq!(r(std::f64::consts::PI), None);
    assert_eq!(r(f64::NAN), None);
}

#[test]
fn grid_is_geometric() {
    let g = lambda_grid(1e-3, 1.0, 100);
    assert_eq!(g.len(), 100);
    assert!((g[0] - 1e-3).abs() < 1e-15 && (g[99] - 1.0).abs() < 1e-12);
    let r = g[1] / g[0];
    assert!(g.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-9));
}

fn random_design(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let y = x.iter().map(|r| 3.0 * r[0] - 2.0 * r[1] + r[2] * 0.5 + rng.gen_range(-0.3..0.3)).collect();
    (x, y)
}

fn fit_at(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let cfg = LassoConfig { lambdas: vec![lambda], ..Default::default() };
    cv_lasso(x, y, &two_folds(x.len()), &cfg).unwrap().coef
}

#[test]
fn large_penalty_gives_intercept_only() {
    let (x, y) = random_design(1, 60, 6);
    let coef = fit_at(&x, &y, 1e9);
    assert!(coef.iter().all(|c| *c == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn support_shrinks_with_penalty(seed in 0u64..1000) {
        let (x, y) = random_design(seed, 60, 6);
        let mut last = usize::MAX;
        for lam in [0.01, 0.1, 1.0, 10.0, 50.0, 200.0, 1000.0] {
            let k = fit_at(&x, &y, lam).iter().filter(|c| **c != 0.0).count();
            prop_assert!(k <= last, "lambda {lam}: {k} > {last}");
            last = k;
        }
    }

    #[test]
    fn pruning_is_monotone(coef in proptest::collection::vec(-2.0f64..2.0, 1..20), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let small = prune(&coef, lo).unwrap_or_default();
        let large = prune(&coef, hi).unwrap_or_default();
        prop_assert!(large.iter().all(|j| small.contains(j)));
        prop_assert_eq!(prune(&coef, 0.0).unwrap(), (0..coef.len()).collect::<Vec<_>>());
    }

    #[test]
    fn rationals_round_trip(n in -500i64..500, d in 1i64..=64) {
        let v = n as f64 / d as f64;
        let r = rationalize_f64(v, 64, 1e-9).unwrap();
        prop_assert_eq!(r, BigRational::new(n.into(), d.into()));
    }
}
