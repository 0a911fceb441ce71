//! Accuracy classes of candidates against a known solution.

use recsolve::dsl::{parse_bool, parse_candidate};
use recsolve::harness::{classify, ClassifyConfig};

fn main() {
    let params = ["x".to_string(), "y".to_string()];
    let pre = parse_bool("x >= 0 and y >= 0").unwrap();
    let cfg = ClassifyConfig::default();
    let merge = "piece x > 0 and y > 0 -> x + y - 1\npiece true -> 0";
    let cases = [
        ("x + y", "x + y"),
        ("max(x, y)", "x + y"),
        ("x + y - 1", merge),
        ("2^(x + y)", "2^(x + y) * (x + 1)"),
        ("x * y", "x + y"),
    ];
    for (cand, expect) in cases {
        let c = parse_candidate(cand, &params).unwrap();
        let e = parse_candidate(expect, &params).unwrap();
        let class = classify(&c, Some(&e), None, &pre, &cfg);
        println!("{cand:<12} vs {:<40} {class}", expect.replace('\n', "; "));
    }
}
