//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines are never captured.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use recsolve::dsl::report::{emit_report, without_timings, ReportHeader};
use recsolve::dsl::{parse_candidate, parse_expr, BenchmarkFile};
use recsolve::eval::{eval_fun, Budget};
use recsolve::guess::regions;
use recsolve::harness::classify::{grid_equal, probe_grid};
use recsolve::harness::{classify, run_corpus, run_parsed, BenchmarkResult, Classification, ClassifyConfig, Method, RunConfig};
use recsolve::linear::{catalog, fit_tier, GuessConfig, LinearError};
use recsolve::model::Expr;
use recsolve::rewrite::simplify;
use recsolve::sample::{build_dataset, choose_bound, SampleConfig};
use recsolve::smt::{verify, SolverConfig, Verification};
use recsolve::value::EvalError;

use common::{bench, oracle};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn solve(file: &BenchmarkFile, seed: u64, domsplit: bool) -> (BenchmarkResult, Duration) {
    let cfg = RunConfig { method: Method::Lasso, verify: true, seed, domsplit, ..Default::default() };
    let t = Instant::now();
    let r = run_parsed(file, &cfg);
    (r, t.elapsed())
}

fn c1_worked_example() -> Check {
    let file = bench("nested");
    let mut slowest = Duration::ZERO;
    for seed in 0..3 {
        let (r, took) = solve(&file, seed, false);
        ensure(r.candidate.as_deref() == Some("1*x"), format!("seed {seed}: candidate {:?}", r.candidate))?;
        ensure(r.score == 1.0, format!("seed {seed}: R^2 {}", r.score))?;
        ensure(r.verification == "proved", format!("seed {seed}: {}", r.verification))?;
        ensure(took <= Duration::from_secs(60), format!("seed {seed}: {took:?}"))?;
        slowest = slowest.max(took);
    }
    Ok(format!("1*x, R^2 = 1, proved on seeds 0-2, slowest {:.2}s", slowest.as_secs_f64()))
}

fn c2_determinization() -> Check {
    let mut out = vec![];
    for (name, want) in [("max_det", "2*x"), ("min_det", "1*x")] {
        let (r, _) = solve(&bench(name), 0, false);
        ensure(r.candidate.as_deref() == Some(want), format!("{name}: {:?}", r.candidate))?;
        ensure(r.verification == "proved", format!("{name}: {}", r.verification))?;
        out.push(format!("{name} {want} proved"));
    }
    Ok(out.join(", "))
}

fn c3_domain_split() -> Check {
    let file = bench("merge");
    let expect = file.expect.clone().unwrap();
    let (split, _) = solve(&file, 0, true);
    ensure(split.classification == Classification::Exact, format!("with split: {}", split.classification))?;
    let cand = split.closed_form.clone().unwrap();
    let grid = probe_grid(&file.system.entry_func().pre, &cand.params, &ClassifyConfig::default());
    ensure(grid_equal(&cand, &expect, &grid), "split candidate differs from the piecewise solution")?;
    ensure(cand.pieces.len() >= 2, "split candidate has one piece")?;
    let (plain, _) = solve(&file, 0, false);
    ensure(plain.classification != Classification::Exact, "exact without split")?;
    Ok(format!(
        "split: {} ({}); no split: {} ({})",
        split.classification,
        split.candidate.unwrap_or_default(),
        plain.classification,
        plain.candidate.unwrap_or_default()
    ))
}

fn c4_verification_suite() -> Check {
    ensure(common::solver_available(), "no SMT solver available")?;
    let solver = SolverConfig::resolve(None);
    let run = |name: &str, text: &str| {
        let file = bench(name);
        let cand = parse_candidate(text, &file.system.entry_func().params).unwrap();
        let t = Instant::now();
        let v = verify(&file.system, &cand, &solver).result;
        (v, t.elapsed())
    };
    let mut slowest = Duration::ZERO;
    for (name, sol) in [("nested", "x"), ("plus_one", "n + 1"), ("max_det", "2 * x"), ("min_det", "x")] {
        let (v, took) = run(name, sol);
        ensure(v == Verification::Proved, format!("{name} {sol}: {v:?}"))?;
        ensure(took <= Duration::from_secs(10), format!("{name}: {took:?}"))?;
        slowest = slowest.max(took);
    }
    let (v, took) = run("nested", "x + 1");
    let zero: std::collections::BTreeMap<String, BigInt> = [("x".to_string(), BigInt::from(0))].into();
    ensure(
        v == Verification::Disproved { counterexample: zero, confirmed: true },
        format!("x + 1: {v:?}"),
    )?;
    ensure(took <= Duration::from_secs(10), format!("x + 1: {took:?}"))?;
    slowest = slowest.max(took);
    Ok(format!("4 proved, x+1 refuted at x=0 (confirmed), slowest query {:.2}s", slowest.as_secs_f64()))
}

fn c5_lasso_timing() -> Check {
    let cfg = GuessConfig::default();
    let scfg = SampleConfig::default();
    let (mut fits, mut desk, mut desk_max, mut overall_max) = (0, 0, Duration::ZERO, Duration::ZERO);
    let mut timeouts = vec![];
    for file in common::corpus() {
        let f = file.system.entry_func();
        let bound = choose_bound(&file.system, f, &scfg).bound;
        for domsplit in [false, true] {
            for (i, (_, constraint, positive)) in regions(f, domsplit).iter().enumerate() {
                let Ok(ds) = build_dataset(&file.system, f, constraint, *positive, bound, &scfg, i as u64 + 1) else {
                    continue;
                };
                for &tier in &cfg.tiers {
                    let nfeat = catalog(&f.params, tier).len();
                    let t = Instant::now();
                    let res = fit_tier(&ds, tier, &cfg);
                    let took = t.elapsed();
                    fits += 1;
                    overall_max = overall_max.max(took);
                    if nfeat <= 22 && ds.train_x.len() <= 100 {
                        desk += 1;
                        desk_max = desk_max.max(took);
                    }
                    if matches!(res, Err(LinearError::Timeout)) && file.category.as_deref() != Some("scale") {
                        timeouts.push(format!("{} {}", file.name, tier.name()));
                    }
                }
            }
        }
    }
    ensure(desk > 0, "no desk-scale fits")?;
    ensure(desk_max <= Duration::from_secs(10), format!("desk-scale fit took {desk_max:?}"))?;
    ensure(timeouts.is_empty(), format!("timeouts: {}", timeouts.join(", ")))?;
    Ok(format!(
        "{fits} fits, {desk} at desk scale (max {:.3}s), overall max {:.3}s, no timeouts",
        desk_max.as_secs_f64(),
        overall_max.as_secs_f64()
    ))
}

fn c6_planted_recovery() -> Check {
    let hits = (0..50).filter(|&s| oracle::planted_trial(s)).count();
    ensure(hits >= 45, format!("{hits}/50 recovered"))?;
    Ok(format!("{hits}/50 trials recover support and coefficients within 1e-3"))
}

fn c7a_exponential() -> Check {
    let mut hits = 0;
    let mut slowest = Duration::ZERO;
    for seed in 0..5 {
        let t = Instant::now();
        if common::exp_run_is_exact(seed) {
            hits += 1;
        }
        slowest = slowest.max(t.elapsed());
    }
    ensure(slowest <= Duration::from_secs(180), format!("a run took {slowest:?}"))?;
    ensure(hits >= 1, "no exact run")?;
    Ok(format!("{hits}/5 runs exact on 2^(x+y), slowest {:.1}s", slowest.as_secs_f64()))
}

fn c7b_fibonacci() -> Check {
    let mut hits = 0;
    let mut slowest = Duration::ZERO;
    let mut seen = vec![];
    for seed in 0..5 {
        let t = Instant::now();
        let ratios = common::fib_growth(seed);
        slowest = slowest.max(t.elapsed());
        if let Some(r) = ratios.iter().find(|r| (1.55..=1.65).contains(*r)) {
            hits += 1;
            seen.push(format!("{r:.4}"));
        }
    }
    ensure(slowest <= Duration::from_secs(180), format!("a run took {slowest:?}"))?;
    ensure(hits >= 1, "no run with growth rate in [1.55, 1.65]")?;
    Ok(format!("{hits}/5 runs with growth rate in [1.55, 1.65] ({}), slowest {:.1}s", seen.join(" "), slowest.as_secs_f64()))
}

fn c8_evaluator_oracle() -> Check {
    let n = std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(|| oracle::evaluator_matches_naive(10))
        .map_err(|e| e.to_string())?
        .join()
        .map_err(|_| "oracle panicked".to_string())??;
    let file = bench("q_nonterm");
    let f = file.system.entry_func();
    for x in 1..=5 {
        let r = eval_fun(&file.system, &f.name, &[BigInt::from(x)], Budget::default());
        ensure(matches!(r, Err(EvalError::BudgetExceeded(_))), format!("q({x}): {r:?}"))?;
    }
    Ok(format!("{n} points agree; q(1..5) exceed the budget"))
}

fn c9_rewriter() -> Check {
    let n = oracle::rewrite_preserves_corpus(1000, 42)?;
    let s = simplify(&parse_expr("2^(x + 1) - 2 * 2^x").unwrap());
    ensure(s == Expr::int(0), format!("2^(x+1) - 2*2^x => {s:?}"))?;
    Ok(format!("{n} corpus expressions x 1000 points preserved; 2^(x+1) - 2*2^x => 0"))
}

fn c10_classification() -> Check {
    let xy = ["x".to_string(), "y".to_string()];
    let pre = recsolve::dsl::parse_bool("x >= 0 and y >= 0").unwrap();
    let cfg = ClassifyConfig::default();
    let cls = |c: &str, e: &str| {
        let c = parse_candidate(c, &xy).unwrap();
        let e = parse_candidate(e, &xy).unwrap();
        classify(&c, Some(&e), None, &pre, &cfg)
    };
    let a = cls("max(x, y)", "x + y");
    ensure(a == Classification::Theta, format!("max(x,y) vs x+y: {a}"))?;
    let b = cls("x + y - 1", "piece x > 0 and y > 0 -> x + y - 1\npiece true -> 0");
    ensure(!matches!(b, Classification::Exact | Classification::Theta), format!("x+y-1 vs merge: {b}"))?;
    let mut n = 0;
    for file in common::corpus() {
        if let Some(e) = &file.expect {
            let c = classify(e, Some(e), None, &file.system.entry_func().pre, &cfg);
            ensure(c == Classification::Exact, format!("{}: {c}", file.name))?;
            n += 1;
        }
    }
    Ok(format!("max vs sum {a}; x+y-1 vs merge {b}; {n} expects reflexively exact"))
}

fn c11_determinism() -> Check {
    let cfg = RunConfig { seed: 0, verify: common::solver_available(), ..Default::default() };
    let header = ReportHeader::from_config(&cfg);
    let run = || -> Result<String, String> {
        let rs = run_corpus(&common::corpus_dir(), &cfg).map_err(|e| e.to_string())?;
        Ok(without_timings(&emit_report(&rs, &header)))
    };
    let (a, b) = (run()?, run()?);
    ensure(a == b, "reports differ")?;
    Ok(format!("two corpus runs identical modulo timings ({} lines, verify={})", a.lines().count(), cfg.verify))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Check); 12] = [
        ("1", "worked example", c1_worked_example),
        ("2", "determinization pair", c2_determinization),
        ("3", "domain splitting", c3_domain_split),
        ("4", "verification suite", c4_verification_suite),
        ("5", "lasso timing", c5_lasso_timing),
        ("6", "planted-model recovery", c6_planted_recovery),
        ("7a", "symbolic regression, 2^(x+y)", c7a_exponential),
        ("7b", "symbolic regression, Fibonacci growth", c7b_fibonacci),
        ("8", "evaluator oracle", c8_evaluator_oracle),
        ("9", "rewriter soundness", c9_rewriter),
        ("10", "classification fidelity", c10_classification),
        ("11", "determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {id:<3} {title}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {id:<3} {title}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
