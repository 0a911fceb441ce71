//! Memoized evaluation under a call budget, including a recurrence that
//! never reaches a base case.

use num_bigint::BigInt;
use recsolve::dsl::parse;
use recsolve::eval::{Budget, Evaluator};

fn main() {
    let mccarthy = parse(
        "def f(x) pre x >= 0 {
           case x > 100 -> x - 10
           case x <= 100 -> f(f(x + 11))
         }
         entry f",
    )
    .unwrap();
    let mut ev = Evaluator::new(&mccarthy.system, Budget::default());
    for x in [0, 50, 99, 100, 101, 150] {
        println!("f({x}) = {:?}", ev.eval_fun("f", &[BigInt::from(x)]).map(|v| v.to_f64()));
    }
    println!("{} calls in total", ev.total_calls);

    let loops = parse(
        "def q(x) pre x >= 0 {
           case x = 0 -> 1
           case x > 0 -> q(x + 1) + 1
         }
         entry q",
    )
    .unwrap();
    let budget = Budget { max_calls: 10_000, ..Default::default() };
    let mut ev = Evaluator::new(&loops.system, budget);
    println!("q(3) = {:?}", ev.eval_fun("q", &[BigInt::from(3)]));
}
