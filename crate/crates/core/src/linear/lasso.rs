use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use super::LinearError;

#[derive(Clone, Debug)]
pub struct LassoConfig {
    /// Penalties, tried from largest to smallest.
    pub lambdas: Vec<f64>,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Wall clock for one call of `cv_lasso`.
    pub timeout: Duration,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig { lambdas: lambda_grid(1e-3, 1.0, 100), tol: 1e-8, max_sweeps: 10_000, timeout: Duration::from_secs(10) }
    }
}

/// `count` geometrically spaced values from `lo` to `hi`.
pub fn lambda_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[derive(Clone, Debug)]
pub struct LassoFit {
    pub lambda: f64,
    /// Coefficients on the raw feature scale.
    pub coef: Vec<f64>,
    pub intercept: f64,
    /// Features with zero variance on the training rows.
    pub constant_features: Vec<usize>,
    /// Mean validation error per penalty, aligned with the sorted grid.
    pub cv_mse: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// Standardized design restricted to some rows.
struct Design {
    mean: Vec<f64>,
    sd: Vec<f64>,
    ymean: f64,
    /// Targets are divided by this (their standard deviation) while solving;
    /// the penalty is divided by it too, so the minimizer is unchanged.
    yscale: f64,
    /// Standardized columns over the chosen rows, active features only.
    z: Vec<Vec<f64>>,
    /// Gram matrix columns, computed the first time a coefficient moves.
    gram: Vec<Option<Vec<f64>>>,
    diag: Vec<f64>,
    /// Standardized columns times centered y.
    xty: Vec<f64>,
    active: Vec<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Design {
    fn new(x: &[Vec<f64>], y: &[f64], rows: &[usize], p: usize) -> Design {
        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        let mut sd = vec![0.0; p];
        for j in 0..p {
            mean[j] = rows.iter().map(|&i| x[i][j]).sum::<f64>() / n;
            let var = rows.iter().map(|&i| (x[i][j] - mean[j]).powi(2)).sum::<f64>() / n;
            sd[j] = var.sqrt();
        }
        let ymean = rows.iter().map(|&i| y[i]).sum::<f64>() / n;
        let active: Vec<usize> =
            (0..p).filter(|&j| sd[j] > 1e-12 * mean[j].abs().max(1.0) && sd[j].is_finite()).collect();
        let yvar = rows.iter().map(|&i| (y[i] - ymean).powi(2)).sum::<f64>() / n;
        let yscale = if yvar > 0.0 && yvar.is_finite() { yvar.sqrt() } else { 1.0 };
        let yc: Vec<f64> = rows.iter().map(|&i| (y[i] - ymean) / yscale).collect();
        let z: Vec<Vec<f64>> =
            active.iter().map(|&j| rows.iter().map(|&i| (x[i][j] - mean[j]) / sd[j]).collect()).collect();
        let diag = z.iter().map(|c| dot(c, c)).collect();
        let xty = z.iter().map(|c| dot(c, &yc)).collect();
        let q = active.len();
        Design { mean, sd, ymean, yscale, z, gram: vec![None; q], diag, xty, active }
    }

    fn column(&mut self, j: usize) -> &[f64] {
        if self.gram[j].is_none() {
            let col = self.z.iter().map(|c| dot(c, &self.z[j])).collect();
            self.gram[j] = Some(col);
        }
        self.gram[j].as_deref().unwrap()
    }

    /// One pass over `coords`; returns the largest coefficient change.
    fn sweep(&mut self, coords: &[usize], beta: &mut [f64], g: &mut [f64], lambda: f64) -> f64 {
        let mut max_delta = 0.0f64;
        let half = lambda / self.yscale / 2.0;
        for &j in coords {
            let gjj = self.diag[j];
            if gjj <= 0.0 {
                continue;
            }
            let rho = self.xty[j] - (g[j] - gjj * beta[j]);
            let new = if rho > half {
                (rho - half) / gjj
            } else if rho < -half {
                (rho + half) / gjj
            } else {
                0.0
            };
            let d = new - beta[j];
            if d != 0.0 {
                let col = self.column(j);
                for (gk, c) in g.iter_mut().zip(col) {
                    *gk += c * d;
                }
                beta[j] = new;
            }
            max_delta = max_delta.max(d.abs());
        }
        max_delta
    }

    /// Coordinate descent for `|yc - Z b|^2 + lambda |b|_1`, warm-started
    /// from `beta`. Full sweeps alternate with sweeps over the nonzero
    /// coefficients until a full sweep changes nothing.
    fn descend(&mut self, beta: &mut [f64], lambda: f64, cfg: &LassoConfig, deadline: Instant) -> Result<(), LinearError> {
        let q = self.active.len();
        // g[j] = (Z^T Z b)_j, maintained incrementally.
        let mut g = vec![0.0; q];
        for k in 0..q {
            if beta[k] != 0.0 {
                let b = beta[k];
                let col = self.column(k).to_vec();
                for (gj, c) in g.iter_mut().zip(&col) {
                    *gj += c * b;
                }
            }
        }
        let all: Vec<usize> = (0..q).collect();
        let mut sweeps = 0;
        while sweeps < cfg.max_sweeps {
            let d = self.sweep(&all, beta, &mut g, lambda);
            sweeps += 1;
            if d <= cfg.tol {
                self.polish(beta, lambda);
                return Ok(());
            }
            let nonzero: Vec<usize> = (0..q).filter(|&j| beta[j] != 0.0).collect();
            while sweeps < cfg.max_sweeps {
                let d = self.sweep(&nonzero, beta, &mut g, lambda);
                sweeps += 1;
                if d <= cfg.tol {
                    break;
                }
                if sweeps % 64 == 0 && Instant::now() > deadline {
                    return Err(LinearError::Timeout);
                }
            }
            if Instant::now() > deadline {
                return Err(LinearError::Timeout);
            }
        }
        self.polish(beta, lambda);
        Ok(())
    }

    /// `b'Gb - 2 xty'b + lambda' |b|_1`, the objective up to a constant.
    fn objective(&mut self, b: &[f64], half: f64) -> f64 {
        let mut quad = 0.0;
        for j in 0..b.len() {
            if b[j] != 0.0 {
                let col = self.column(j);
                quad += b[j] * b.iter().zip(col).map(|(x, c)| x * c).sum::<f64>();
            }
        }
        quad - 2.0 * dot(&self.xty, b) + 2.0 * half * b.iter().map(|x| x.abs()).sum::<f64>()
    }

    fn gradient_gap(&mut self, b: &[f64], j: usize) -> f64 {
        let mut g = 0.0;
        for (k, &bk) in b.iter().enumerate() {
            if bk != 0.0 {
                g += self.column(k)[j] * bk;
            }
        }
        self.xty[j] - g
    }

    /// Finish a coordinate-descent solution by feature-sign search: solve
    /// the optimality conditions exactly on the active set, line-search
    /// across sign changes, and activate the worst violator until none is
    /// left. Coordinate descent crawls on nearly collinear columns; this
    /// does not. The result replaces `beta` only if the objective drops.
    fn polish(&mut self, beta: &mut [f64], lambda: f64) {
        let q = beta.len();
        let half = lambda / self.yscale / 2.0;
        let mut b = beta.to_vec();
        let mut sign: Vec<f64> = b.iter().map(|x| if *x == 0.0 { 0.0 } else { x.signum() }).collect();
        for _ in 0..10 * q.max(1) {
            let act: Vec<usize> = (0..q).filter(|&j| sign[j] != 0.0).collect();
            if !act.is_empty() {
                let k = act.len();
                let mut m = DMatrix::<f64>::zeros(k, k);
                for (c, &j) in act.iter().enumerate() {
                    let col = self.column(j);
                    for (r, &i) in act.iter().enumerate() {
                        m[(r, c)] = col[i];
                    }
                }
                let rhs = DVector::from_iterator(k, act.iter().map(|&j| self.xty[j] - half * sign[j]));
                let Some(sol) = m.lu().solve(&rhs) else { return };
                if sol.iter().any(|v| !v.is_finite()) {
                    return;
                }
                // Candidates: the exact solution and every zero crossing on
                // the way to it.
                let mut target = b.clone();
                for (&j, v) in act.iter().zip(sol.iter()) {
                    target[j] = *v;
                }
                let mut best = (self.objective(&target, half), target.clone());
                for &j in &act {
                    if b[j] != 0.0 && target[j].signum() != b[j].signum() {
                        let t = b[j] / (b[j] - target[j]);
                        let mut pt: Vec<f64> = b.iter().zip(&target).map(|(x, y)| x + t * (y - x)).collect();
                        pt[j] = 0.0;
                        let f = self.objective(&pt, half);
                        if f < best.0 {
                            best = (f, pt);
                        }
                    }
                }
                let moved = best.1 != b;
                b = best.1;
                for j in 0..q {
                    sign[j] = if b[j] == 0.0 { 0.0 } else { b[j].signum() };
                }
                // Active coefficients not yet optimal: solve again.
                if moved && act.iter().any(|&j| b[j] == 0.0) {
                    continue;
                }
            }
            let mut worst: Option<(usize, f64)> = None;
            for j in 0..q {
                if sign[j] == 0.0 {
                    let gap = self.gradient_gap(&b, j);
                    if gap.abs() > half * (1.0 + 1e-9) + 1e-12 && worst.is_none_or(|(_, w)| gap.abs() > w.abs()) {
                        worst = Some((j, gap));
                    }
                }
            }
            match worst {
                Some((j, gap)) => sign[j] = gap.signum(),
                None => break,
            }
        }
        if self.objective(&b, half) < self.objective(beta, half) {
            beta.copy_from_slice(&b);
        }
    }

    fn raw(&self, beta: &[f64], p: usize) -> (Vec<f64>, f64) {
        let mut coef = vec![0.0; p];
        let mut intercept = self.ymean;
        for (a, &j) in self.active.iter().enumerate() {
            coef[j] = beta[a] * self.yscale / self.sd[j];
            intercept -= coef[j] * self.mean[j];
        }
        (coef, intercept)
    }
}

fn predict(coef: &[f64], intercept: f64, row: &[f64]) -> f64 {
    intercept + coef.iter().zip(row).map(|(c, v)| c * v).sum::<f64>()
}

/// Cross-validated lasso over the penalty grid. Folds index into `x`; the
/// penalty with the lowest mean validation error wins, ties going to the
/// larger penalty. The returned fit is refit on all rows.
pub fn cv_lasso(x: &[Vec<f64>], y: &[f64], folds: &[Vec<usize>], cfg: &LassoConfig) -> Result<LassoFit, LinearError> {
    let n = x.len();
    let p = x.first().map(|r| r.len()).unwrap_or(0);
    if n < folds.len().max(2) {
        return Err(LinearError::TooFewRows(n));
    }
    let deadline = Instant::now() + cfg.timeout;
    let mut lambdas = cfg.lambdas.clone();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut mse = vec![0.0; lambdas.len()];
    let usable: Vec<&Vec<usize>> = folds.iter().filter(|f| !f.is_empty() && f.len() < n).collect();
    for fold in &usable {
        let mut in_fold = vec![false; n];
        for &i in fold.iter() {
            in_fold[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
        let mut d = Design::new(x, y, &train, p);
        let mut beta = vec![0.0; d.active.len()];
        for (li, &lam) in lambdas.iter().enumerate() {
            d.descend(&mut beta, lam, cfg, deadline)?;
            let (coef, b0) = d.raw(&beta, p);
            let err: f64 = fold.iter().map(|&i| (y[i] - predict(&coef, b0, &x[i])).powi(2)).sum::<f64>();
            mse[li] += err / fold.len() as f64 / usable.len() as f64;
        }
    }
    let best = mse.iter().cloned().fold(f64::INFINITY, f64::min);
    // Lambdas are sorted descending, so the first near-minimal one is the largest.
    let chosen = if best.is_finite() {
        mse.iter().position(|&m| m <= best + 1e-12 * best.abs().max(1e-300)).unwrap_or(lambdas.len() - 1)
    } else {
        lambdas.len() - 1
    };
    let all: Vec<usize> = (0..n).collect();
    let mut d = Design::new(x, y, &all, p);
    let mut beta = vec![0.0; d.active.len()];
    for &lam in &lambdas[..=chosen] {
        d.descend(&mut beta, lam, cfg, deadline)?;
    }
    let (coef, intercept) = d.raw(&beta, p);
    let constant_features = (0..p).filter(|j| !d.active.contains(j)).collect();
    Ok(LassoFit { lambda: lambdas[chosen], coef, intercept, constant_features, cv_mse: mse, lambdas })
}
