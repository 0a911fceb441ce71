//! Accuracy classes of a candidate against an expected closed form.

use num_bigint::BigInt;
use rand::Rng;
use serde::Serialize;

use super::logspace::{piecewise_value, Mag};
use crate::model::{BoolExpr, PiecewiseClosedForm};
use crate::sample::rng_for;
use crate::smt::Verification;
use crate::value::{eval_bool, EvalError, Num};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Classification {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "exp-theta")]
    ExpTheta,
    #[serde(rename = "nontrivial")]
    NonTrivial,
    #[serde(rename = "none")]
    None,
}

impl Classification {
    pub const ALL: [Classification; 5] = [
        Classification::Exact,
        Classification::Theta,
        Classification::ExpTheta,
        Classification::NonTrivial,
        Classification::None,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Classification::Exact => "exact",
            Classification::Theta => "theta",
            Classification::ExpTheta => "exp-theta",
            Classification::NonTrivial => "nontrivial",
            Classification::None => "none",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    /// Probe grid is `[0, grid_max]^m`.
    pub grid_max: i64,
    /// Grids larger than this are replaced by `grid_samples` random points.
    pub grid_limit: u64,
    pub grid_samples: usize,
    /// Ratios must stay within `[1/band, band]`.
    pub band: f64,
    /// Ray parameter runs over `2^t_min ..= 2^t_max`.
    pub t_min: u32,
    pub t_max: u32,
    /// Random base points per axis, in addition to the origin.
    pub base_points: usize,
    /// How many of the last in-domain ray points must pass.
    pub tail: usize,
    pub seed: u64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            grid_max: 30,
            grid_limit: 200_000,
            grid_samples: 20_000,
            band: 8.0,
            t_min: 4,
            t_max: 20,
            base_points: 3,
            tail: 5,
            seed: 0,
        }
    }
}

fn in_pre(pre: &BoolExpr, params: &[String], p: &[BigInt]) -> bool {
    let env = params.iter().cloned().zip(p.iter().cloned()).collect();
    eval_bool(pre, &env).unwrap_or(false)
}

/// Probe grid points satisfying `pre`.
pub fn probe_grid(pre: &BoolExpr, params: &[String], cfg: &ClassifyConfig) -> Vec<Vec<BigInt>> {
    let m = params.len();
    let side = (cfg.grid_max + 1) as u64;
    let total = side.checked_pow(m as u32).unwrap_or(u64::MAX);
    let points: Vec<Vec<i64>> = if total <= cfg.grid_limit {
        (0..total)
            .map(|mut k| {
                (0..m)
                    .map(|_| {
                        let v = (k % side) as i64;
                        k /= side;
                        v
                    })
                    .collect()
            })
            .collect()
    } else {
        let mut rng = rng_for(cfg.seed, 7);
        (0..cfg.grid_samples).map(|_| (0..m).map(|_| rng.gen_range(0..=cfg.grid_max)).collect()).collect()
    };
    points
        .into_iter()
        .map(|p| p.into_iter().map(BigInt::from).collect::<Vec<_>>())
        .filter(|p| in_pre(pre, params, p))
        .collect()
}

enum Point {
    Value(Num),
    Huge(Mag),
    Undefined,
}

fn eval_point(cf: &PiecewiseClosedForm, p: &[BigInt]) -> Point {
    match cf.eval(p) {
        Ok(v) => Point::Value(v),
        Err(EvalError::Overflow) => match piecewise_value(cf, &cf.env_for(p)) {
            Some(m) => Point::Huge(m),
            None => Point::Undefined,
        },
        Err(_) => Point::Undefined,
    }
}

fn same(a: &Point, b: &Point) -> bool {
    match (a, b) {
        (Point::Value(x), Point::Value(y)) => x.approx_eq(y, 1e-9),
        (Point::Huge(x), Point::Huge(y)) => match (x, y) {
            (Mag::Val { neg: n1, ln: l1 }, Mag::Val { neg: n2, ln: l2 }) => n1 == n2 && (l1 - l2).abs() <= 1e-9,
            _ => x == y,
        },
        _ => false,
    }
}

/// Pointwise agreement with `expect` wherever `expect` is defined on the
/// grid. An empty comparison set does not count as agreement.
pub fn grid_equal(cand: &PiecewiseClosedForm, expect: &PiecewiseClosedForm, grid: &[Vec<BigInt>]) -> bool {
    let mut compared = 0;
    for p in grid {
        let e = eval_point(expect, p);
        if matches!(e, Point::Undefined) {
            continue;
        }
        if !same(&eval_point(cand, p), &e) {
            return false;
        }
        compared += 1;
    }
    compared > 0
}

/// Candidate defined and finite on every grid point; with `varying`, also
/// taking at least two distinct values.
pub fn grid_finite(cand: &PiecewiseClosedForm, grid: &[Vec<BigInt>], varying: bool) -> bool {
    if cand.pieces.is_empty() || grid.is_empty() {
        return false;
    }
    let mut first: Option<f64> = None;
    let mut distinct = false;
    for p in grid {
        let v = match eval_point(cand, p) {
            Point::Value(v) => v.to_f64(),
            _ => return false,
        };
        if !v.is_finite() {
            return false;
        }
        match first {
            None => first = Some(v),
            Some(f) if f != v => distinct = true,
            _ => {}
        }
    }
    distinct || !varying
}

/// Probe rays as `(base, direction)`: each axis from the origin and from
/// random base points, plus the all-ones diagonal.
pub fn rays(m: usize, cfg: &ClassifyConfig) -> Vec<(Vec<i64>, Vec<i64>)> {
    let mut rng = rng_for(cfg.seed, 11);
    let mut bases = vec![vec![0; m]];
    for _ in 0..cfg.base_points {
        bases.push((0..m).map(|_| rng.gen_range(0..=cfg.grid_max)).collect());
    }
    let mut out = vec![];
    for i in 0..m {
        for b in &bases {
            let mut d = vec![0; m];
            d[i] = 1;
            out.push((b.clone(), d));
        }
    }
    if m > 1 {
        out.push((vec![0; m], vec![1; m]));
    }
    out
}

/// Values of both forms along one ray, at in-domain points only.
fn ray_values(
    cand: &PiecewiseClosedForm,
    expect: &PiecewiseClosedForm,
    pre: &BoolExpr,
    base: &[i64],
    dir: &[i64],
    cfg: &ClassifyConfig,
) -> Vec<(Option<Mag>, Option<Mag>)> {
    let mut out = vec![];
    for k in cfg.t_min..=cfg.t_max {
        let t = 1i64 << k;
        let p: Vec<BigInt> = base.iter().zip(dir).map(|(b, d)| BigInt::from(b + t * d)).collect();
        if !in_pre(pre, &expect.params, &p) {
            continue;
        }
        let env = expect.env_for(&p);
        out.push((piecewise_value(cand, &env), piecewise_value(expect, &env)));
    }
    out
}

fn within(a: Option<Mag>, b: Option<Mag>, band: f64) -> bool {
    match (a, b) {
        (Some(Mag::Zero), Some(Mag::Zero)) => true,
        (Some(Mag::Val { neg: n1, ln: l1 }), Some(Mag::Val { neg: n2, ln: l2 })) => {
            n1 == n2 && (l1 - l2).abs() <= band.ln() + 1e-12
        }
        _ => false,
    }
}

/// The ratio test on every ray with enough in-domain points. `log` applies
/// it to `ln|.|` of both sides instead.
fn ray_test(samples: &[Vec<(Option<Mag>, Option<Mag>)>], cfg: &ClassifyConfig, log: bool) -> bool {
    let mut used = 0;
    for vals in samples {
        if vals.len() < cfg.tail {
            continue;
        }
        used += 1;
        for &(c, e) in &vals[vals.len() - cfg.tail..] {
            let (c, e) = if log { (c.and_then(Mag::log_abs), e.and_then(Mag::log_abs)) } else { (c, e) };
            if !within(c, e, cfg.band) {
                return false;
            }
        }
    }
    used > 0
}

/// Classify `cand`. Without `expect` only the verification outcome and
/// finiteness are available. A confirmed counterexample rules out `Exact`
/// even when the probe grid misses it.
pub fn classify(
    cand: &PiecewiseClosedForm,
    expect: Option<&PiecewiseClosedForm>,
    verification: Option<&Verification>,
    pre: &BoolExpr,
    cfg: &ClassifyConfig,
) -> Classification {
    if verification.is_some_and(Verification::is_proved) {
        return Classification::Exact;
    }
    if cand.pieces.is_empty() {
        return Classification::None;
    }
    let grid = probe_grid(pre, &cand.params, cfg);
    let Some(expect) = expect else {
        return if grid_finite(cand, &grid, false) { Classification::NonTrivial } else { Classification::None };
    };
    let refuted = matches!(verification, Some(Verification::Disproved { confirmed: true, .. }));
    if !refuted && grid_equal(cand, expect, &grid) {
        return Classification::Exact;
    }
    let samples: Vec<_> =
        rays(cand.params.len(), cfg).iter().map(|(b, d)| ray_values(cand, expect, pre, b, d, cfg)).collect();
    if ray_test(&samples, cfg, false) {
        Classification::Theta
    } else if ray_test(&samples, cfg, true) {
        Classification::ExpTheta
    } else if grid_finite(cand, &grid, true) {
        Classification::NonTrivial
    } else {
        Classification::None
    }
}
