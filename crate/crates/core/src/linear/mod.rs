//! Sparse linear guesses: lasso over a catalog of base functions, pruning,
//! least-squares refit and exact coefficients.

pub mod catalog;
pub mod lasso;
pub mod ols;
pub mod rational;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

pub use catalog::{catalog, Tier};
pub use lasso::{cv_lasso, lambda_grid, LassoConfig, LassoFit};
pub use rational::rationalize_f64;

use crate::guess::{guess_with, r_squared, Guess, PieceFit};
use crate::model::{Expr, FuncDef, RecurrenceSystem};
use crate::sample::{Dataset, SampleConfig};
use crate::value::{env_of, eval_ground, eval_guarded};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearError {
    #[error("lasso fit exceeded its time limit")]
    Timeout,
    #[error("too few rows ({0})")]
    TooFewRows(usize),
    #[error("no feature survived pruning")]
    AllPruned,
    #[error("no row has finite features")]
    EmptyTrainingSet,
}

#[derive(Clone, Debug)]
pub struct GuessConfig {
    pub lasso: LassoConfig,
    /// Prune threshold on raw-scale lasso coefficients.
    pub epsilon: f64,
    pub max_den: i64,
    /// Relative tolerance for accepting a rational coefficient.
    pub rat_tol: f64,
    pub tiers: Vec<Tier>,
}

impl Default for GuessConfig {
    fn default() -> Self {
        GuessConfig { lasso: LassoConfig::default(), epsilon: 0.05, max_den: 64, rat_tol: 1e-4, tiers: Tier::ALL.to_vec() }
    }
}

/// Feature rows for a list of base functions.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    pub features: Vec<Expr>,
    pub inputs: Vec<Vec<i64>>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Positions in the original input list of the kept rows.
    pub kept: Vec<usize>,
    /// Rows dropped for a non-finite or failing feature.
    pub dropped: usize,
}

/// Evaluate `features` at every input under guarded semantics. Rows with a
/// failing or non-finite feature are dropped.
pub fn build_training_set(
    features: &[Expr],
    params: &[String],
    inputs: &[Vec<i64>],
    targets: &[f64],
) -> Result<TrainingSet, LinearError> {
    let mut ts = TrainingSet {
        features: features.to_vec(),
        inputs: vec![],
        rows: vec![],
        targets: vec![],
        kept: vec![],
        dropped: 0,
    };
    for (i, (x, y)) in inputs.iter().zip(targets).enumerate() {
        let env = env_of(params, x);
        let row: Option<Vec<f64>> = features
            .iter()
            .map(|t| eval_guarded(t, &env).ok().map(|v| v.to_f64()).filter(|v| v.is_finite()))
            .collect();
        match row {
            Some(r) if y.is_finite() => {
                ts.rows.push(r);
                ts.targets.push(*y);
                ts.inputs.push(x.clone());
                ts.kept.push(i);
            }
            _ => ts.dropped += 1,
        }
    }
    if ts.rows.is_empty() {
        return Err(LinearError::EmptyTrainingSet);
    }
    Ok(ts)
}

/// Indices of coefficients with magnitude at least `epsilon`.
pub fn prune(coef: &[f64], epsilon: f64) -> Result<Vec<usize>, LinearError> {
    let keep: Vec<usize> = (0..coef.len()).filter(|&j| coef[j].abs() >= epsilon).collect();
    if keep.is_empty() && !coef.is_empty() {
        return Err(LinearError::AllPruned);
    }
    Ok(keep)
}

/// A refitted model on a subset of the catalog.
#[derive(Clone, Debug, Serialize)]
pub struct LinearModel {
    pub tier: Tier,
    #[serde(serialize_with = "ser_exprs")]
    pub selected: Vec<Expr>,
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub lambda: Option<f64>,
    /// R² of `body` on the scoring rows.
    pub r2: f64,
    #[serde(serialize_with = "ser_expr")]
    pub body: Expr,
    pub exact: bool,
    /// Why the fit degraded to an intercept-only model, if it did.
    pub fallback: Option<String>,
}

fn ser_exprs<S: serde::Serializer>(v: &[Expr], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|e| e.to_string()))
}

fn ser_expr<S: serde::Serializer>(v: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// `Σ c_i t_i + c_0` with zero terms omitted; subtraction for negative
/// coefficients. The empty sum is `0`.
pub fn assemble(terms: &[(BigRational, Expr)], intercept: &BigRational) -> Expr {
    let mut acc: Option<Expr> = None;
    let mut push = |c: &BigRational, t: Option<&Expr>| {
        if c.is_zero() {
            return;
        }
        let term = |c: BigRational| match t {
            Some(t) => Expr::Const(c) * t.clone(),
            None => Expr::Const(c),
        };
        acc = Some(match acc.take() {
            None => term(c.clone()),
            Some(a) if c.is_negative() => a - term(-c.clone()),
            Some(a) => a + term(c.clone()),
        });
    };
    for (c, t) in terms {
        push(c, Some(t));
    }
    push(intercept, None);
    acc.unwrap_or_else(|| Expr::int(0))
}

/// Exact coefficients: continued-fraction rationals when close enough,
/// the binary value of the double otherwise. Near-zero values become 0.
pub fn rationalize_coefs(coef: &[f64], intercept: f64, cfg: &GuessConfig) -> (Vec<BigRational>, BigRational, bool) {
    let mut exact = true;
    let mut one = |v: f64| -> BigRational {
        if v.abs() < cfg.rat_tol {
            return BigRational::zero();
        }
        match rationalize_f64(v, cfg.max_den, cfg.rat_tol) {
            Some(r) => r,
            None => {
                exact = false;
                rational::exact_f64(v)
            }
        }
    };
    let cs = coef.iter().map(|&c| one(c)).collect();
    let b0 = one(intercept);
    (cs, b0, exact)
}

/// Strict-semantics predictions of a call-free expression.
pub fn predict(body: &Expr, params: &[String], xs: &[Vec<i64>]) -> Vec<f64> {
    xs.iter()
        .map(|x| eval_ground(body, &env_of(params, x)).map(|v| v.to_f64()).unwrap_or(f64::NAN))
        .collect()
}

fn finish(
    tier: Tier,
    selected: Vec<Expr>,
    coef: Vec<f64>,
    intercept: f64,
    lambda: Option<f64>,
    fallback: Option<String>,
    ds: &Dataset,
    cfg: &GuessConfig,
) -> LinearModel {
    let (sx, sy) = ds.score_rows();
    let (cs, b0, exact) = rationalize_coefs(&coef, intercept, cfg);
    let terms: Vec<(BigRational, Expr)> = cs.into_iter().zip(selected.iter().cloned()).collect();
    let body = assemble(&terms, &b0);
    let r2 = r_squared(&predict(&body, &ds.params, sx), sy);
    // Keep the raw doubles if rounding to small rationals made the fit worse.
    let raw_terms: Vec<(BigRational, Expr)> =
        coef.iter().map(|&c| rational::exact_f64(c)).zip(selected.iter().cloned()).collect();
    let raw_body = assemble(&raw_terms, &rational::exact_f64(intercept));
    let raw_r2 = r_squared(&predict(&raw_body, &ds.params, sx), sy);
    let (body, r2, exact) = if raw_r2 > r2 + 1e-9 { (raw_body, raw_r2, false) } else { (body, r2, exact) };
    LinearModel { tier, selected, coef, intercept, lambda, r2, body, exact, fallback }
}

fn intercept_only(tier: Tier, ds: &Dataset, cfg: &GuessConfig, why: String) -> LinearModel {
    let mean = ds.train_y.iter().sum::<f64>() / ds.train_y.len().max(1) as f64;
    finish(tier, vec![], vec![], mean, None, Some(why), ds, cfg)
}

/// Lasso, prune and refit on one catalog tier.
pub fn fit_tier(ds: &Dataset, tier: Tier, cfg: &GuessConfig) -> Result<LinearModel, LinearError> {
    let feats = catalog(&ds.params, tier);
    if ds.train_x.len() < 2 * ds.folds.len().max(1) {
        return Ok(intercept_only(tier, ds, cfg, format!("only {} rows", ds.train_x.len())));
    }
    let ts = build_training_set(&feats, &ds.params, &ds.train_x, &ds.train_y)?;
    // Fold indices refer to the dataset rows; map them onto kept rows.
    let mut pos = vec![usize::MAX; ds.train_x.len()];
    for (new, &old) in ts.kept.iter().enumerate() {
        pos[old] = new;
    }
    let folds: Vec<Vec<usize>> = ds
        .folds
        .iter()
        .map(|f| f.iter().map(|&i| pos[i]).filter(|&i| i != usize::MAX).collect())
        .collect();
    if ts.rows.len() < 2 * folds.len().max(1) {
        return Ok(intercept_only(tier, ds, cfg, format!("only {} finite rows", ts.rows.len())));
    }
    let fit = cv_lasso(&ts.rows, &ts.targets, &folds, &cfg.lasso)?;
    let keep = match prune(&fit.coef, cfg.epsilon) {
        Ok(k) => k,
        Err(LinearError::AllPruned) => return Ok(intercept_only(tier, ds, cfg, "all features pruned".into())),
        Err(e) => return Err(e),
    };
    if keep.is_empty() {
        return Ok(intercept_only(tier, ds, cfg, "no feature varies".into()));
    }
    let (coef, intercept) = ols::ols(&ts.rows, &ts.targets, &keep);
    let selected = keep.iter().map(|&j| feats[j].clone()).collect();
    Ok(finish(tier, selected, coef, intercept, Some(fit.lambda), None, ds, cfg))
}

/// Outcome of every tier tried on one dataset.
#[derive(Clone, Debug)]
pub struct TierReport {
    pub tier: Tier,
    pub result: Result<LinearModel, LinearError>,
}

/// Best model across tiers: highest R², then fewer features, then smaller
/// tier.
pub fn fit_best(ds: &Dataset, cfg: &GuessConfig) -> (Option<LinearModel>, Vec<TierReport>) {
    let reports: Vec<TierReport> =
        cfg.tiers.iter().map(|&tier| TierReport { tier, result: fit_tier(ds, tier, cfg) }).collect();
    let mut best: Option<&LinearModel> = None;
    for m in reports.iter().filter_map(|r| r.result.as_ref().ok()) {
        best = match best {
            None => Some(m),
            Some(b) => {
                let better = if (m.r2 - b.r2).abs() > 1e-9 || m.r2.is_infinite() || b.r2.is_infinite() {
                    m.r2 > b.r2
                } else {
                    (m.selected.len(), m.tier) < (b.selected.len(), b.tier)
                };
                Some(if better { m } else { b })
            }
        };
    }
    (best.cloned(), reports)
}

/// Lasso guess for `f`, per subdomain when `domsplit` is set.
pub fn guess_linear(sys: &RecurrenceSystem, f: &FuncDef, scfg: &SampleConfig, cfg: &GuessConfig, domsplit: bool) -> Guess {
    guess_with(sys, f, scfg, domsplit, |ds, _| {
        let (best, reports) = fit_best(ds, cfg);
        match best {
            Some(m) => Ok(PieceFit {
                score: m.r2.clamp(0.0, 1.0),
                exact: m.exact,
                note: format!(
                    "tier={} features={}{}",
                    m.tier.name(),
                    m.selected.len(),
                    m.fallback.as_ref().map(|f| format!(" fallback={f}")).unwrap_or_default()
                ),
                body: m.body,
            }),
            None => Err(reports
                .iter()
                .filter_map(|r| r.result.as_ref().err().map(|e| format!("{}: {e}", r.tier.name())))
                .collect::<Vec<_>>()
                .join("; ")),
        }
    })
}
