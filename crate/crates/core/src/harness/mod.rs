//! Running benchmarks end to end: sample, guess, verify, classify.

pub mod classify;
pub mod logspace;

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use classify::{classify, Classification, ClassifyConfig};

use crate::dsl::{self, print_candidate_inline, BenchmarkFile};
use crate::guess::{Guess, PieceReport};
use crate::linear::{guess_linear, GuessConfig};
use crate::model::PiecewiseClosedForm;
use crate::sample::SampleConfig;
use crate::smt::{verify, SolverConfig, Verification};
use crate::symreg::{guess_symbolic, GpConfig, OperatorSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lasso,
    Symreg,
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lasso => "lasso",
            Method::Symreg => "symreg",
            Method::Auto => "auto",
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lasso" => Ok(Method::Lasso),
            "symreg" => Ok(Method::Symreg),
            "auto" => Ok(Method::Auto),
            _ => Err(format!("unknown method `{s}` (expected lasso, symreg or auto)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub method: Method,
    pub domsplit: bool,
    /// Master seed; repeat `r` uses `seed + r` for sampling and search.
    pub seed: u64,
    pub repeat: usize,
    pub sample: SampleConfig,
    pub linear: GuessConfig,
    pub gp: GpConfig,
    pub ops: OperatorSet,
    pub verify: bool,
    pub solver: SolverConfig,
    /// `auto` tries symbolic regression below this test score.
    pub auto_threshold: f64,
    /// Candidates scoring below this are not sent to the solver.
    pub verify_threshold: f64,
    pub classify: ClassifyConfig,
    /// Worker threads for corpus runs; `None` uses every logical core.
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Lasso,
            domsplit: false,
            seed: 0,
            repeat: 2,
            sample: SampleConfig::default(),
            linear: GuessConfig::default(),
            gp: GpConfig::default(),
            ops: OperatorSet::default(),
            verify: false,
            solver: SolverConfig::default(),
            auto_threshold: 0.999999,
            verify_threshold: 0.999,
            classify: ClassifyConfig::default(),
            jobs: None,
            out: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Timings {
    pub sample: f64,
    pub fit: f64,
    pub verify: f64,
}

/// One guessing run.
#[derive(Clone, Debug, Serialize)]
pub struct Attempt {
    pub method: Method,
    pub seed: u64,
    pub score: f64,
    pub candidate: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkResult {
    pub name: String,
    pub category: Option<String>,
    pub reconstructed: bool,
    /// Method that produced the reported candidate.
    pub method: Method,
    pub domsplit: bool,
    pub seed: u64,
    pub candidate: Option<String>,
    pub score: f64,
    /// `proved`, `disproved`, `unknown`, `unsupported`, `skipped` or `error`.
    pub verification: String,
    pub verification_detail: Option<Verification>,
    pub classification: Classification,
    pub expect: Option<String>,
    pub bound: Option<i64>,
    pub pieces: Vec<PieceReport>,
    pub attempts: Vec<Attempt>,
    pub timings: Timings,
    /// Internal error, if any stage failed outright.
    pub error: Option<String>,
    #[serde(skip)]
    pub closed_form: Option<PiecewiseClosedForm>,
}

impl BenchmarkResult {
    fn failed(name: &str, cfg: &RunConfig, error: String) -> BenchmarkResult {
        BenchmarkResult {
            name: name.to_string(),
            category: None,
            reconstructed: false,
            method: cfg.method,
            domsplit: cfg.domsplit,
            seed: cfg.seed,
            candidate: None,
            score: 0.0,
            verification: "skipped".into(),
            verification_detail: None,
            classification: Classification::None,
            expect: None,
            bound: None,
            pieces: vec![],
            attempts: vec![],
            timings: Timings::default(),
            error: Some(error),
            closed_form: None,
        }
    }
}

fn run_method(file: &BenchmarkFile, method: Method, seed: u64, cfg: &RunConfig) -> Guess {
    let sys = &file.system;
    let f = sys.entry_func();
    let sample = SampleConfig { seed, ..cfg.sample.clone() };
    match method {
        Method::Symreg => {
            let gp = GpConfig { seed, ..cfg.gp.clone() };
            guess_symbolic(sys, f, &sample, &cfg.ops, &gp, cfg.domsplit)
        }
        _ => guess_linear(sys, f, &sample, &cfg.linear, cfg.domsplit),
    }
}

/// Best of `cfg.repeat` runs of one method; ties keep the earlier run.
fn best_of(file: &BenchmarkFile, method: Method, cfg: &RunConfig, attempts: &mut Vec<Attempt>, t: &mut Timings) -> Guess {
    let mut best: Option<Guess> = None;
    for r in 0..cfg.repeat.max(1) {
        let seed = cfg.seed.wrapping_add(r as u64);
        let g = run_method(file, method, seed, cfg);
        t.sample += g.sample_secs;
        t.fit += g.fit_secs;
        attempts.push(Attempt {
            method,
            seed,
            score: g.candidate.score,
            candidate: print_candidate_inline(&g.candidate),
        });
        if best.as_ref().is_none_or(|b| g.candidate.score > b.candidate.score) {
            best = Some(g);
        }
    }
    best.expect("at least one run")
}

/// Guess, optionally verify, and classify one parsed benchmark.
pub fn run_parsed(file: &BenchmarkFile, cfg: &RunConfig) -> BenchmarkResult {
    let mut timings = Timings::default();
    let mut attempts = vec![];
    let (method, guess) = match cfg.method {
        Method::Auto => {
            let lasso = best_of(file, Method::Lasso, cfg, &mut attempts, &mut timings);
            if lasso.candidate.score >= cfg.auto_threshold {
                (Method::Lasso, lasso)
            } else {
                let sr = best_of(file, Method::Symreg, cfg, &mut attempts, &mut timings);
                if sr.candidate.score > lasso.candidate.score {
                    (Method::Symreg, sr)
                } else {
                    (Method::Lasso, lasso)
                }
            }
        }
        m => (m, best_of(file, m, cfg, &mut attempts, &mut timings)),
    };
    let cand = guess.candidate;
    let mut error = None;
    let (verification, detail) = if cfg.verify && !cand.pieces.is_empty() && cand.score >= cfg.verify_threshold {
        let t = Instant::now();
        let rep = verify(&file.system, &cand, &cfg.solver);
        timings.verify = t.elapsed().as_secs_f64();
        if let Verification::Unknown { reason } = &rep.result {
            if reason.starts_with("solver error") {
                error = Some(reason.clone());
            }
        }
        (rep.result.name().to_string(), Some(rep.result))
    } else {
        ("skipped".to_string(), None)
    };
    let pre = &file.system.entry_func().pre;
    let class = classify(&cand, file.expect.as_ref(), detail.as_ref(), pre, &cfg.classify);
    BenchmarkResult {
        name: file.name.clone(),
        category: file.category.clone(),
        reconstructed: file.reconstructed(),
        method,
        domsplit: cfg.domsplit,
        seed: cfg.seed,
        candidate: (!cand.pieces.is_empty()).then(|| print_candidate_inline(&cand)),
        score: cand.score,
        verification,
        verification_detail: detail,
        classification: class,
        expect: file.expect.as_ref().map(print_candidate_inline),
        bound: Some(guess.bound),
        pieces: guess.pieces,
        attempts,
        timings,
        error,
        closed_form: Some(cand),
    }
}

/// Parse and run one benchmark file. Failures are recorded, never raised.
pub fn run_benchmark(path: &Path, cfg: &RunConfig) -> BenchmarkResult {
    let name = path.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    let file = match dsl::parse_file(path) {
        Ok(f) => f,
        Err(e) => return BenchmarkResult::failed(&name, cfg, format!("parse error: {e}")),
    };
    match std::panic::catch_unwind(|| run_parsed(&file, cfg)) {
        Ok(r) => r,
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            let mut r = BenchmarkResult::failed(&name, cfg, format!("internal error: {msg}"));
            r.category = file.category.clone();
            r.reconstructed = file.reconstructed();
            r
        }
    }
}

/// `.rec` files directly inside `dir`, sorted by file name.
pub fn corpus_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "rec"))
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Run every benchmark in `dir` on a worker pool. Results are in file-name
/// order.
pub fn run_corpus(dir: &Path, cfg: &RunConfig) -> std::io::Result<Vec<BenchmarkResult>> {
    let files = corpus_files(dir)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(std::io::Error::other)?;
    Ok(pool.install(|| files.par_iter().map(|p| run_benchmark(p, cfg)).collect()))
}
