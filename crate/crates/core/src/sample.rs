//! Input sampling, bound selection, domain splitting and data splits.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eval::{eval_batch, Budget};
use crate::model::{BoolExpr, CmpOp, Expr, FuncDef, RecurrenceSystem};
use crate::rewrite::simplify_bool;
use crate::value::{eval_bool, Env};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("no point of the sampling box satisfies the constraint")]
    EmptyDomain,
    #[error("every sampled input failed to evaluate")]
    EmptyTrainingSet,
}

#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub n: usize,
    /// Fixed sampling bound; `None` walks the ladder.
    pub bound: Option<i64>,
    pub ladder: Vec<i64>,
    pub test_size: usize,
    pub folds: usize,
    pub seed: u64,
    pub budget: Budget,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            n: 100,
            bound: None,
            ladder: vec![20, 10, 5, 3],
            test_size: 30,
            folds: 2,
            seed: 0,
            budget: Budget::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Vec<i64>>,
    /// Fewer than the requested number of distinct points exist.
    pub shortfall: bool,
}

/// Boxes up to this many points are enumerated instead of rejection-sampled.
const ENUMERATION_LIMIT: u64 = 250_000;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn satisfies(c: &BoolExpr, params: &[String], p: &[i64]) -> bool {
    let env: Env = params.iter().cloned().zip(p.iter().map(|&v| BigInt::from(v))).collect();
    eval_bool(c, &env).unwrap_or(false)
}

/// Up to `n` distinct points of `[lo, hi]^m` satisfying `constraint`, drawn
/// uniformly without replacement.
pub fn sample_box(
    constraint: &BoolExpr,
    params: &[String],
    lo: i64,
    hi: i64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SampleSet, SampleError> {
    let m = params.len() as u32;
    let width = (hi - lo + 1).max(0) as u64;
    let total = width.checked_pow(m).unwrap_or(u64::MAX);
    let points = if total <= ENUMERATION_LIMIT {
        let mut all = Vec::new();
        for k in 0..total {
            let mut rest = k;
            let p: Vec<i64> = (0..m)
                .map(|_| {
                    let d = (rest % width) as i64;
                    rest /= width;
                    lo + d
                })
                .rev()
                .collect();
            if satisfies(constraint, params, &p) {
                all.push(p);
            }
        }
        all.shuffle(rng);
        all.truncate(n);
        all
    } else {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut attempts = 0usize;
        while out.len() < n && attempts < 1000 * n.max(1) {
            attempts += 1;
            let p: Vec<i64> = (0..m).map(|_| rng.gen_range(lo..=hi)).collect();
            if !seen.contains(&p) && satisfies(constraint, params, &p) {
                seen.insert(p.clone());
                out.push(p);
            }
        }
        out
    };
    if points.is_empty() {
        return Err(SampleError::EmptyDomain);
    }
    let shortfall = points.len() < n;
    Ok(SampleSet { points, shortfall })
}

/// Sample from `[0, bound]^m`, or `[1, bound]^m` when `positive` is set.
pub fn sample_inputs(
    constraint: &BoolExpr,
    params: &[String],
    bound: i64,
    n: usize,
    positive: bool,
    seed: u64,
    stream: u64,
) -> Result<SampleSet, SampleError> {
    let mut rng = rng_for(seed, stream);
    sample_box(constraint, params, if positive { 1 } else { 0 }, bound, n, &mut rng)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundChoice {
    pub bound: i64,
    /// No rung of the ladder produced a single successful evaluation.
    pub all_failed: bool,
}

/// Largest rung of the ladder whose sample evaluates within the wall clock
/// with at least one success.
pub fn choose_bound(sys: &RecurrenceSystem, f: &FuncDef, cfg: &SampleConfig) -> BoundChoice {
    if let Some(b) = cfg.bound {
        return BoundChoice { bound: b, all_failed: false };
    }
    for &b in &cfg.ladder {
        let Ok(s) = sample_inputs(&f.pre, &f.params, b, cfg.n, false, cfg.seed, 0) else {
            continue;
        };
        let (vals, timed_out) = eval_batch(sys, &f.name, &s.points, cfg.budget);
        if !timed_out && vals.iter().any(|v| v.is_ok()) {
            return BoundChoice { bound: b, all_failed: false };
        }
    }
    BoundChoice { bound: *cfg.ladder.last().unwrap_or(&3), all_failed: true }
}

/// Subdomain of each case: its guard and the negations of all earlier guards.
pub fn split_domains(f: &FuncDef) -> Vec<BoolExpr> {
    let mut out = vec![];
    let mut earlier: Vec<BoolExpr> = vec![];
    for c in &f.cases {
        let mut parts = vec![c.guard.clone()];
        parts.extend(earlier.iter().map(|g| BoolExpr::not(g.clone())));
        out.push(simplify_bool(&BoolExpr::all(parts)));
        earlier.push(c.guard.clone());
    }
    out
}

/// `x_i >= 1` for every parameter.
pub fn positive_orthant(params: &[String]) -> BoolExpr {
    BoolExpr::all(params.iter().map(|p| BoolExpr::cmp(CmpOp::Ge, Expr::var(p), Expr::int(1))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Splits {
    pub train: Vec<Vec<i64>>,
    /// Indices into `train`, one list per fold.
    pub folds: Vec<Vec<usize>>,
    pub test: Vec<Vec<i64>>,
    /// Too few points for a test set; scores fall back to training rows.
    pub test_empty: bool,
}

/// Fewer training points than this leave the test set empty.
pub const MIN_ROWS_FOR_TEST: usize = 5;

/// Partition `samples` into `k` folds and attach a test set: `fresh_test`
/// when enough points exist, else a held-out fifth of the samples.
pub fn make_splits(samples: Vec<Vec<i64>>, fresh_test: Vec<Vec<i64>>, k: usize, seed: u64) -> Splits {
    let mut train = samples;
    let mut test = vec![];
    let mut test_empty = false;
    if train.len() < MIN_ROWS_FOR_TEST {
        test_empty = true;
    } else if !fresh_test.is_empty() {
        test = fresh_test;
    } else {
        let held = train.len() / 5;
        test = train.split_off(train.len() - held);
    }
    let mut idx: Vec<usize> = (0..train.len()).collect();
    idx.shuffle(&mut rng_for(seed, 7));
    let k = k.max(1).min(train.len().max(1));
    let mut folds = vec![vec![]; k];
    for (j, i) in idx.into_iter().enumerate() {
        folds[j % k].push(i);
    }
    for f in &mut folds {
        f.sort();
    }
    Splits { train, folds, test, test_empty }
}

/// Training and test data for one (sub)domain.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub params: Vec<String>,
    pub train_x: Vec<Vec<i64>>,
    pub train_y: Vec<f64>,
    pub folds: Vec<Vec<usize>>,
    pub test_x: Vec<Vec<i64>>,
    pub test_y: Vec<f64>,
    pub test_empty: bool,
    pub shortfall: bool,
    /// Sampled inputs whose evaluation failed and were dropped.
    pub dropped: usize,
}

impl Dataset {
    /// Rows used for scoring: the test set, or the training rows when empty.
    pub fn score_rows(&self) -> (&[Vec<i64>], &[f64]) {
        if self.test_x.is_empty() {
            (&self.train_x, &self.train_y)
        } else {
            (&self.test_x, &self.test_y)
        }
    }
}

fn evaluate(sys: &RecurrenceSystem, f: &str, pts: Vec<Vec<i64>>, budget: Budget) -> (Vec<Vec<i64>>, Vec<f64>, usize) {
    let (vals, _) = eval_batch(sys, f, &pts, budget);
    let mut xs = vec![];
    let mut ys = vec![];
    let mut dropped = 0;
    for (p, v) in pts.into_iter().zip(vals) {
        match v {
            Ok(v) if v.to_f64().is_finite() => {
                xs.push(p);
                ys.push(v.to_f64());
            }
            _ => dropped += 1,
        }
    }
    (xs, ys, dropped)
}

/// Sample, evaluate and split data for `f` restricted to `constraint`
/// (which should already include the precondition).
pub fn build_dataset(
    sys: &RecurrenceSystem,
    f: &FuncDef,
    constraint: &BoolExpr,
    positive: bool,
    bound: i64,
    cfg: &SampleConfig,
    stream: u64,
) -> Result<Dataset, SampleError> {
    let s = sample_inputs(constraint, &f.params, bound, cfg.n, positive, cfg.seed, 2 * stream + 1)?;
    let (tx, ty, dropped) = evaluate(sys, &f.name, s.points, cfg.budget);
    if tx.is_empty() {
        return Err(SampleError::EmptyTrainingSet);
    }
    let fresh = sample_inputs(constraint, &f.params, bound, cfg.test_size, positive, cfg.seed ^ 0x9e37_79b9, 2 * stream + 2)
        .map(|s| s.points)
        .unwrap_or_default();
    let splits = make_splits(tx.clone(), fresh, cfg.folds, cfg.seed ^ stream);
    let lookup: std::collections::HashMap<&Vec<i64>, f64> = tx.iter().zip(ty.iter().copied()).collect();
    let train_y = splits.train.iter().map(|p| lookup[p]).collect();
    let (test_x, test_y) = if splits.test_empty {
        (vec![], vec![])
    } else {
        let (x, y, _) = evaluate(sys, &f.name, splits.test.clone(), cfg.budget);
        (x, y)
    };
    Ok(Dataset {
        params: f.params.clone(),
        train_x: splits.train,
        train_y,
        folds: splits.folds,
        test_x,
        test_y,
        test_empty: splits.test_empty,
        shortfall: s.shortfall,
        dropped,
    })
}
