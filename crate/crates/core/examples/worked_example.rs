//! Guess and check on the nested recurrence `f(x) = f(f(x-1)) + 1`.
//!
//! Run with `cargo run --example worked_example`. Needs `z3` on the path
//! (or `RECSOLVE_SOLVER`) for the check stage.

use recsolve::dsl::{parse, print_candidate};
use recsolve::linear::{guess_linear, GuessConfig};
use recsolve::sample::SampleConfig;
use recsolve::smt::{verify, SolverConfig};

const SRC: &str = "
def f(x) pre x >= 0 {
  case x = 0 -> 0
  case x > 0 -> f(f(x - 1)) + 1
}
entry f
";

fn main() {
    let file = parse(SRC).expect("valid benchmark");
    let f = file.system.entry_func();

    let guess = guess_linear(&file.system, f, &SampleConfig::default(), &GuessConfig::default(), false);
    println!("bound {}  test R^2 {}", guess.bound, guess.candidate.score);
    for p in &guess.pieces {
        println!("  {} rows, {}", p.train_rows, p.note);
    }
    println!("candidate:\n{}", print_candidate(&guess.candidate));

    let report = verify(&file.system, &guess.candidate, &SolverConfig::resolve(None));
    println!("verification: {:?} ({} obligations, {} solver calls)", report.result, report.obligations, report.solver_calls);
}
