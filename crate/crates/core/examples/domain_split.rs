//! Merge cost with and without fitting one model per equation guard.

use recsolve::dsl::parse;
use recsolve::harness::{run_parsed, RunConfig};

const MERGE: &str = "
def f(x, y) pre x >= 0 and y >= 0 {
  case x = 0 or y = 0 -> 0
  case x > 0 and y > 0 -> 1 + max(f(x - 1, y), f(x, y - 1))
}
entry f
expect
  piece x > 0 and y > 0 -> x + y - 1
  piece true -> 0
";

fn main() {
    let file = parse(MERGE).unwrap();
    for domsplit in [false, true] {
        let cfg = RunConfig { domsplit, verify: true, ..Default::default() };
        let r = run_parsed(&file, &cfg);
        println!("domsplit={domsplit}");
        println!("  candidate      {}", r.candidate.as_deref().unwrap_or("-"));
        println!("  score          {:.6}", r.score);
        println!("  verification   {}", r.verification);
        println!("  classification {}", r.classification);
    }
}
