//! Evolving expressions for data no linear catalog covers.

use recsolve::dsl::print_expr;
use recsolve::symreg::{evolve, BinOp, GpConfig, OperatorSet, UnOp};

fn main() {
    // 2^(x + y) with a deliberately small operator set.
    let mut xs = vec![];
    let mut ys = vec![];
    for x in 0..8 {
        for y in 0..8 {
            xs.push(vec![x as f64, y as f64]);
            ys.push(2f64.powi(x + y));
        }
    }
    let ops = OperatorSet { binary: vec![BinOp::Add, BinOp::Mul], unary: vec![UnOp::Exp2] };
    let front = evolve(&xs, &ys, &ops, &GpConfig { seed: 1, ..Default::default() }, 0);
    let params = ["x".to_string(), "y".to_string()];
    println!("front for 2^(x+y), {} iterations:", front.iterations);
    for e in &front.entries {
        let mut exact = true;
        println!("  c={:<3} mse={:<12.4e} {}", e.complexity, e.loss, print_expr(&e.tree.to_expr(&params, true, &mut exact)));
    }

    // Fibonacci numbers: the front recovers the golden-ratio growth rate.
    let mut fib = vec![0f64, 1.0];
    for i in 2..=20 {
        fib.push(fib[i - 1] + fib[i - 2]);
    }
    let xs: Vec<Vec<f64>> = (2..=20).map(|x| vec![x as f64]).collect();
    let ys: Vec<f64> = (2..=20).map(|x| fib[x]).collect();
    let front = evolve(&xs, &ys, &OperatorSet::default(), &GpConfig { seed: 0, ..Default::default() }, 0);
    println!("front for fib(x), x >= 2:");
    for e in &front.entries {
        let ratio = e.tree.eval(&[31.0]) / e.tree.eval(&[30.0]);
        let mut exact = true;
        let expr = print_expr(&e.tree.to_expr(&["x".to_string()], false, &mut exact));
        println!("  c={:<3} mse={:<12.4e} growth={ratio:<8.4} {expr}", e.complexity, e.loss);
    }
}
