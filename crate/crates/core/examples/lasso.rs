//! Cross-validated lasso on a planted sparse model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recsolve::dsl::print_expr;
use recsolve::linear::{build_training_set, catalog, cv_lasso, ols::ols, prune, LassoConfig, Tier};

fn main() {
    let params = ["x".to_string()];
    let feats = catalog(&params, Tier::Large);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inputs: Vec<Vec<i64>> = (0..100).map(|_| vec![rng.gen_range(1..=20)]).collect();
    // y = 3x^2 - 2 ceil(log2 x) + 5
    let targets: Vec<f64> =
        inputs.iter().map(|p| 3.0 * (p[0] * p[0]) as f64 - 2.0 * (p[0] as f64).log2().ceil() + 5.0).collect();

    let ts = build_training_set(&feats, &params, &inputs, &targets).unwrap();
    let folds: Vec<Vec<usize>> = (0..2).map(|k| (0..ts.rows.len()).filter(|i| i % 2 == k).collect()).collect();
    let fit = cv_lasso(&ts.rows, &ts.targets, &folds, &LassoConfig::default()).unwrap();
    println!("chosen lambda {:.4}", fit.lambda);
    let keep = prune(&fit.coef, 0.05).unwrap();
    let (coef, b0) = ols(&ts.rows, &ts.targets, &keep);
    for (c, &j) in coef.iter().zip(&keep) {
        println!("  {c:>10.6} * {}", print_expr(&feats[j]));
    }
    println!("  {b0:>10.6}");
}
