//! Per-subdomain driver shared by the linear and symbolic guessers.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{BoolExpr, Expr, FuncDef, Piece, PiecewiseClosedForm, RecurrenceSystem};
use crate::rewrite::simplify_bool;
use crate::sample::{build_dataset, choose_bound, split_domains, Dataset, SampleConfig, SampleError};

/// What a guesser produced for one dataset.
#[derive(Clone, Debug)]
pub struct PieceFit {
    pub body: Expr,
    pub score: f64,
    /// All constants are exact rationals.
    pub exact: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PieceStatus {
    Fitted { score: f64 },
    /// No sampled point satisfies the subdomain; the piece is skipped.
    Infeasible,
    /// Sampling or fitting failed; the overall score drops to 0.
    Failed { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceReport {
    pub subdomain: String,
    #[serde(flatten)]
    pub status: PieceStatus,
    pub train_rows: usize,
    pub test_rows: usize,
    pub shortfall: bool,
    pub test_empty: bool,
    pub dropped: usize,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct Guess {
    pub candidate: PiecewiseClosedForm,
    pub pieces: Vec<PieceReport>,
    pub bound: i64,
    /// No rung of the ladder produced a successful evaluation.
    pub bound_failed: bool,
    /// Seconds spent sampling and evaluating, summed over pieces.
    pub sample_secs: f64,
    /// Seconds spent fitting, summed over pieces.
    pub fit_secs: f64,
}

/// Regions to fit: `(candidate subdomain, sampling constraint, positive box)`.
/// Without splitting there is one global region sampled on `x >= 1`.
pub fn regions(f: &FuncDef, domsplit: bool) -> Vec<(BoolExpr, BoolExpr, bool)> {
    if !domsplit {
        return vec![(BoolExpr::True, f.pre.clone(), true)];
    }
    split_domains(f)
        .into_iter()
        .map(|d| {
            let c = simplify_bool(&BoolExpr::and(f.pre.clone(), d.clone()));
            (d, c, false)
        })
        .collect()
}

/// Sample every region of `f`, fit it with `fit` and assemble the pieces.
/// The overall score is the smallest piece score, or 0 if any piece failed.
pub fn guess_with<F>(sys: &RecurrenceSystem, f: &FuncDef, cfg: &SampleConfig, domsplit: bool, fit: F) -> Guess
where
    F: Fn(&Dataset, u64) -> Result<PieceFit, String> + Sync,
{
    let t0 = Instant::now();
    let choice = choose_bound(sys, f, cfg);
    let bound_secs = t0.elapsed().as_secs_f64();
    let regs = regions(f, domsplit);
    let results: Vec<(PieceReport, Option<Piece>, f64, f64)> = regs
        .par_iter()
        .enumerate()
        .map(|(i, (sub, constraint, positive))| {
            let stream = i as u64 + 1;
            let mut rep = PieceReport {
                subdomain: sub.to_string(),
                status: PieceStatus::Infeasible,
                train_rows: 0,
                test_rows: 0,
                shortfall: false,
                test_empty: false,
                dropped: 0,
                note: String::new(),
            };
            let t = Instant::now();
            let built = build_dataset(sys, f, constraint, *positive, choice.bound, cfg, stream);
            let ts = t.elapsed().as_secs_f64();
            let ds = match built {
                Ok(ds) => ds,
                Err(SampleError::EmptyDomain) => return (rep, None, ts, 0.0),
                Err(e) => {
                    rep.status = PieceStatus::Failed { reason: e.to_string() };
                    return (rep, None, ts, 0.0);
                }
            };
            rep.train_rows = ds.train_x.len();
            rep.test_rows = ds.test_x.len();
            rep.shortfall = ds.shortfall;
            rep.test_empty = ds.test_empty;
            rep.dropped = ds.dropped;
            let t = Instant::now();
            let fitted = fit(&ds, stream);
            let tf = t.elapsed().as_secs_f64();
            match fitted {
                Ok(pf) => {
                    rep.status = PieceStatus::Fitted { score: pf.score };
                    rep.note = pf.note;
                    let piece = Piece { subdomain: sub.clone(), body: pf.body, score: pf.score, exact: pf.exact };
                    (rep, Some(piece), ts, tf)
                }
                Err(e) => {
                    rep.status = PieceStatus::Failed { reason: e };
                    (rep, None, ts, tf)
                }
            }
        })
        .collect();
    let failed = results.iter().any(|(r, ..)| matches!(r.status, PieceStatus::Failed { .. }));
    let sample_secs = bound_secs + results.iter().map(|r| r.2).sum::<f64>();
    let fit_secs = results.iter().map(|r| r.3).sum::<f64>();
    let (reports, pieces): (Vec<_>, Vec<_>) = results.into_iter().map(|(r, p, ..)| (r, p)).unzip();
    let pieces: Vec<Piece> = pieces.into_iter().flatten().collect();
    let score = if failed || pieces.is_empty() {
        0.0
    } else {
        pieces.iter().map(|p| p.score).fold(1.0, f64::min)
    };
    Guess {
        candidate: PiecewiseClosedForm { params: f.params.clone(), pieces, score },
        pieces: reports,
        bound: choice.bound,
        bound_failed: choice.all_failed,
        sample_secs,
        fit_secs,
    }
}

/// Coefficient of determination. Constant targets score 1 when matched
/// (to within rounding), else `-inf`. Non-finite predictions give `-inf`.
pub fn r_squared(pred: &[f64], actual: &[f64]) -> f64 {
    if actual.is_empty() || pred.len() != actual.len() || pred.iter().any(|p| !p.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = pred.iter().zip(actual).map(|(p, y)| (y - p).powi(2)).sum();
    let scale: f64 = actual.iter().map(|y| y * y).sum::<f64>().max(1.0);
    if ss_tot <= 1e-24 * scale {
        return if ss_res <= 1e-18 * scale { 1.0 } else { f64::NEG_INFINITY };
    }
    1.0 - ss_res / ss_tot
}
