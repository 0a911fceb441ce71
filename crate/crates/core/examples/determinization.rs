//! A non-deterministic step `f(x-1) + 1` or `f(x-1) + 2`, resolved by
//! `max` for an upper bound and `min` for a lower bound.

use recsolve::dsl::{parse, print_candidate_inline};
use recsolve::linear::{guess_linear, GuessConfig};
use recsolve::sample::SampleConfig;
use recsolve::smt::{verify, SolverConfig};

fn main() {
    let solver = SolverConfig::resolve(None);
    for op in ["max", "min"] {
        let src = format!(
            "def f(x) pre x >= 0 {{
               case x = 0 -> 0
               case x > 0 -> {op}(f(x - 1) + 1, f(x - 1) + 2)
             }}
             entry f"
        );
        let file = parse(&src).unwrap();
        let g = guess_linear(&file.system, file.system.entry_func(), &SampleConfig::default(), &GuessConfig::default(), false);
        let v = verify(&file.system, &g.candidate, &solver);
        println!("{op}: {}  -> {}", print_candidate_inline(&g.candidate), v.result.name());
    }
}
