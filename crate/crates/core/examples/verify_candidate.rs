//! Checking hand-written closed forms, including a wrong one.

use recsolve::dsl::{parse, parse_candidate};
use recsolve::smt::{verify, SolverConfig, Verification};

fn main() {
    let file = parse(
        "def f(n) pre n >= 0 {
           case n = 0 -> 1
           case n > 0 -> f(n - 1) + 1
         }
         entry f",
    )
    .unwrap();
    let params = &file.system.entry_func().params;
    let solver = SolverConfig::resolve(None);

    for text in ["n + 1", "n + 2", "piece n = 0 -> 1\npiece n > 0 -> n + 1", "2^n"] {
        let cand = parse_candidate(text, params).unwrap();
        let rep = verify(&file.system, &cand, &solver);
        let detail = match &rep.result {
            Verification::Disproved { counterexample, confirmed } => {
                format!("counterexample {counterexample:?}, confirmed by evaluation: {confirmed}")
            }
            Verification::Unknown { reason } => reason.clone(),
            Verification::Unsupported { constructs } => constructs.join(", "),
            Verification::Proved => String::new(),
        };
        println!("{:<40} {:<12} {detail}", text.replace('\n', "; "), rep.result.name());
    }
}
