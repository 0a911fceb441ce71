use nalgebra::{DMatrix, DVector};

/// Least squares with intercept on the chosen columns. Columns are
/// standardized first; a singular system gets a `1e-10` ridge on the
/// diagonal and, failing that, a pseudo-inverse.
pub fn ols(x: &[Vec<f64>], y: &[f64], cols: &[usize]) -> (Vec<f64>, f64) {
    let n = x.len();
    let ymean = y.iter().sum::<f64>() / n.max(1) as f64;
    if cols.is_empty() || n == 0 {
        return (vec![], ymean);
    }
    let k = cols.len();
    let mut mean = vec![0.0; k];
    let mut sd = vec![0.0; k];
    for (a, &j) in cols.iter().enumerate() {
        mean[a] = x.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = x.iter().map(|r| (r[j] - mean[a]).powi(2)).sum::<f64>() / n as f64;
        sd[a] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }
    let z = DMatrix::from_fn(n, k, |i, a| (x[i][cols[a]] - mean[a]) / sd[a]);
    let yc = DVector::from_fn(n, |i, _| y[i] - ymean);
    let g = z.transpose() * &z;
    let rhs = z.transpose() * &yc;
    let beta = g
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| {
            let jitter = DMatrix::identity(k, k) * 1e-10;
            (g.clone() + jitter).cholesky().map(|c| c.solve(&rhs))
        })
        .or_else(|| g.clone().svd(true, true).solve(&rhs, 1e-12).ok())
        .unwrap_or_else(|| DVector::zeros(k));
    let mut coef = vec![0.0; k];
    let mut intercept = ymean;
    for a in 0..k {
        coef[a] = beta[a] / sd[a];
        intercept -= coef[a] * mean[a];
    }
    (coef, intercept)
}
