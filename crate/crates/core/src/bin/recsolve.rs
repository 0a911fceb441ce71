use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use recsolve::dsl::report::{emit_csv, emit_report, summarize, ReportHeader};
use recsolve::dsl::{parse_candidate, parse_file, print_candidate_inline};
use recsolve::harness::{classify, run_benchmark, run_corpus, BenchmarkResult, Method, RunConfig};
use recsolve::linear::lambda_grid;
use recsolve::smt::{verify, SolverConfig, Verification};

#[derive(Parser)]
#[command(name = "recsolve", version, about = "Guess and check closed forms of recurrence relations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one benchmark file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve every `.rec` file in a directory.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads (default: logical cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Verify a hand-written closed form against a benchmark.
    Check {
        file: PathBuf,
        #[arg(long)]
        candidate: String,
        #[command(flatten)]
        smt: SmtArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SmtArgs {
    /// Solver command; overrides RECSOLVE_SOLVER.
    #[arg(long)]
    solver: Option<String>,
    /// Seconds per solver query.
    #[arg(long, default_value_t = 10.0)]
    smt_timeout: f64,
    /// Keep every query as an .smt2 file next to the report.
    #[arg(long)]
    debug_smt: bool,
}

#[derive(Clone, Copy, Debug)]
enum Bound {
    Auto,
    Fixed(i64),
}

fn parse_bound(s: &str) -> Result<Bound, String> {
    if s == "auto" {
        return Ok(Bound::Auto);
    }
    match s.parse::<i64>() {
        Ok(n) if n >= 1 => Ok(Bound::Fixed(n)),
        _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || format!("expected LO:HI:COUNT, got `{s}`");
    let [lo, hi, n] = parts.as_slice() else { return Err(bad()) };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && n >= 1) {
        return Err(format!("need 0 < LO <= HI and COUNT >= 1, got `{s}`"));
    }
    Ok(lambda_grid(lo, hi, n))
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "lasso")]
    method: Method,
    /// Fit one piece per case of the equation.
    #[arg(long)]
    domsplit: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training inputs per piece.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Sampling box bound: `auto` or a fixed value.
    #[arg(long, default_value = "auto", value_parser = parse_bound)]
    bound: Bound,
    /// Coefficients below this magnitude are pruned after the lasso fit.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 2)]
    folds: usize,
    /// Penalty grid, geometric.
    #[arg(long, value_parser = parse_grid)]
    lambda_grid: Option<Vec<f64>>,
    /// Guessing runs per method; the best is kept.
    #[arg(long, default_value_t = 2)]
    repeat: usize,
    /// Send candidates to the SMT solver.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    smt: SmtArgs,
    /// Report path; `.csv` selects the CSV projection.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative tolerance when rounding coefficients to fractions.
    #[arg(long, default_value_t = 1e-4)]
    rat_tol: f64,
    /// `auto` falls back to symbolic regression below this test score.
    #[arg(long, default_value_t = 0.999999)]
    auto_threshold: f64,
    /// Ratio band for the asymptotic classes.
    #[arg(long, default_value_t = 8.0)]
    band: f64,
    /// Symbolic regression time budget per piece, in seconds.
    #[arg(long, default_value_t = 180.0)]
    symreg_budget: f64,
    /// Recursive calls allowed per evaluation.
    #[arg(long, default_value_t = 1_000_000)]
    max_calls: u64,
    /// Recursion depth allowed per evaluation.
    #[arg(long, default_value_t = 10_000)]
    max_depth: usize,
    /// Seconds allowed per evaluation batch.
    #[arg(long, default_value_t = 2.0)]
    eval_timeout: f64,
}

fn seconds(s: f64, flag: &str) -> Result<Duration, String> {
    Duration::try_from_secs_f64(s).map_err(|_| format!("--{flag} must be a non-negative number of seconds"))
}

fn debug_dir(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => {
            let stem = p.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_else(|| "report".into());
            p.with_file_name(format!("{stem}.smt"))
        }
        None => PathBuf::from("recsolve-smt"),
    }
}

fn solver_config(a: &SmtArgs, out: Option<&Path>) -> Result<SolverConfig, String> {
    let mut s = SolverConfig::resolve(a.solver.as_deref());
    if s.command.is_empty() {
        return Err("--solver must not be empty".into());
    }
    s.timeout = seconds(a.smt_timeout, "smt-timeout")?;
    if a.debug_smt {
        s.debug_dir = Some(debug_dir(out));
    }
    Ok(s)
}

fn run_config(a: &RunArgs, jobs: Option<usize>) -> Result<RunConfig, String> {
    if a.samples == 0 {
        return Err("--samples must be positive".into());
    }
    if a.folds < 2 {
        return Err("--folds must be at least 2".into());
    }
    // Written to reject NaN as well.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(a.band > 1.0) {
        return Err("--band must exceed 1".into());
    }
    let mut cfg = RunConfig {
        method: a.method,
        domsplit: a.domsplit,
        seed: a.seed,
        repeat: a.repeat.max(1),
        verify: a.verify,
        auto_threshold: a.auto_threshold,
        jobs,
        out: a.out.clone(),
        ..RunConfig::default()
    };
    cfg.sample.n = a.samples;
    cfg.sample.folds = a.folds;
    cfg.sample.bound = match a.bound {
        Bound::Auto => None,
        Bound::Fixed(n) => Some(n),
    };
    cfg.sample.budget.max_calls = a.max_calls;
    cfg.sample.budget.max_depth = a.max_depth;
    cfg.sample.budget.wall = seconds(a.eval_timeout, "eval-timeout")?;
    cfg.linear.epsilon = a.epsilon;
    cfg.linear.rat_tol = a.rat_tol;
    if let Some(g) = &a.lambda_grid {
        cfg.linear.lasso.lambdas = g.clone();
    }
    cfg.gp.budget = seconds(a.symreg_budget, "symreg-budget")?;
    cfg.classify.band = a.band;
    cfg.classify.seed = a.seed;
    cfg.solver = solver_config(&a.smt, a.out.as_deref())?;
    Ok(cfg)
}

fn write_report(results: &[BenchmarkResult], cfg: &RunConfig) -> Result<(), String> {
    let Some(path) = &cfg.out else { return Ok(()) };
    let text = if path.extension().is_some_and(|e| e == "csv") {
        emit_csv(results)
    } else {
        emit_report(results, &ReportHeader::from_config(cfg))
    };
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn describe(r: &BenchmarkResult) {
    println!("benchmark:      {}", r.name);
    println!("method:         {}", r.method.name());
    println!("candidate:      {}", r.candidate.as_deref().unwrap_or("-"));
    println!("score:          {}", r.score);
    match &r.verification_detail {
        Some(Verification::Disproved { counterexample, confirmed }) => {
            let pt: Vec<String> = counterexample.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("verification:   disproved at {} (confirmed: {confirmed})", pt.join(", "));
        }
        Some(Verification::Unknown { reason }) => println!("verification:   unknown ({reason})"),
        Some(Verification::Unsupported { constructs }) => {
            println!("verification:   unsupported ({})", constructs.join(", "))
        }
        _ => println!("verification:   {}", r.verification),
    }
    println!("classification: {}", r.classification);
    if let Some(e) = &r.error {
        println!("error:          {e}");
    }
}

enum Failure {
    Usage(String),
    Internal(String),
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Solve { file, run } => {
            let cfg = run_config(&run, None).map_err(Failure::Usage)?;
            parse_file(&file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            let r = run_benchmark(&file, &cfg);
            describe(&r);
            let results = [r];
            write_report(&results, &cfg).map_err(Failure::Internal)?;
            match &results[0].error {
                Some(e) => Err(Failure::Internal(e.clone())),
                None => Ok(()),
            }
        }
        Cmd::Corpus { dir, run, jobs } => {
            let cfg = run_config(&run, jobs).map_err(Failure::Usage)?;
            if !dir.is_dir() {
                return Err(Failure::Usage(format!("{} is not a directory", dir.display())));
            }
            let results = run_corpus(&dir, &cfg).map_err(|e| Failure::Internal(e.to_string()))?;
            for r in &results {
                println!(
                    "{:<16} {:<10} {:<12} {:<11} {}",
                    r.name,
                    r.classification.symbol(),
                    r.verification,
                    format!("{:.6}", r.score),
                    r.candidate.as_deref().or(r.error.as_deref()).unwrap_or("-")
                );
            }
            let s = summarize(&results);
            let counts: Vec<String> = s.classification.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("total {}: {} errors={}", s.total, counts.join(" "), s.errors);
            write_report(&results, &cfg).map_err(Failure::Internal)?;
            if s.errors > 0 {
                return Err(Failure::Internal(format!("{} benchmark(s) failed", s.errors)));
            }
            Ok(())
        }
        Cmd::Check { file, candidate, smt, out } => {
            let solver = solver_config(&smt, out.as_deref()).map_err(Failure::Usage)?;
            let bench = parse_file(&file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
            let f = bench.system.entry_func();
            let cand = parse_candidate(&candidate, &f.params).map_err(|e| Failure::Usage(format!("candidate: {e}")))?;
            let rep = verify(&bench.system, &cand, &solver);
            let class = classify(&cand, bench.expect.as_ref(), Some(&rep.result), &f.pre, &Default::default());
            println!("candidate:      {}", print_candidate_inline(&cand));
            println!("verification:   {}", serde_json::to_string(&rep.result).unwrap_or_default());
            println!("classification: {class}");
            if let Some(p) = out {
                let text = serde_json::to_string_pretty(&rep).unwrap_or_default();
                std::fs::write(&p, text + "\n").map_err(|e| Failure::Internal(format!("cannot write {}: {e}", p.display())))?;
            }
            match &rep.result {
                Verification::Unknown { reason } if reason.starts_with("solver error") => {
                    Err(Failure::Internal(reason.clone()))
                }
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
