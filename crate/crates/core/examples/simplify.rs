//! The rewriter on a few closed forms.

use recsolve::dsl::{parse_expr, print_expr};
use recsolve::rewrite::simplify;

fn main() {
    for src in [
        "2^(x + 1) - 2 * 2^x",
        "(x + 1) * (x - 1) - x^2",
        "max(x, x) + min(y, y)",
        "floor(x / 1) + 0 * y",
        "3 * x + 2 * x - x",
    ] {
        let e = parse_expr(src).unwrap();
        println!("{src:<28} => {}", print_expr(&simplify(&e)));
    }
}
