use num_traits::Signed;

use super::{BenchmarkFile, FORMAT_VERSION};
use crate::model::{rational_to_string, BoolExpr, Expr, PiecewiseClosedForm, RecurrenceSystem};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Pow(..) => POWER,
        Expr::Const(c) if !c.is_integer() => PRODUCT,
        Expr::Const(c) if c.is_negative() => UNARY,
        _ => ATOM,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let s = print_expr(e);
    if level(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn is_int_const(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.is_integer())
}

/// Canonical text of an expression.
pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Const(c) => rational_to_string(c),
        Expr::Var(v) => v.clone(),
        Expr::Add(a, b) => format!("{} + {}", wrap(a, SUM), wrap(b, PRODUCT)),
        Expr::Sub(a, b) => format!("{} - {}", wrap(a, SUM), wrap(b, PRODUCT)),
        Expr::Mul(a, b) => format!("{}*{}", wrap(a, PRODUCT), wrap(b, UNARY)),
        Expr::Div(a, b) => {
            // Keep `INT / INT` from reading back as a single rational literal.
            let positive_int = matches!(&**b, Expr::Const(c) if c.is_integer() && c.is_positive());
            let lhs = if is_int_const(a) && positive_int {
                format!("({})", print_expr(a))
            } else {
                wrap(a, PRODUCT)
            };
            format!("{}/{}", lhs, wrap(b, UNARY))
        }
        Expr::Pow(a, b) => format!("{}^{}", wrap(a, ATOM), wrap(b, UNARY)),
        Expr::Floor(a) => format!("floor({})", print_expr(a)),
        Expr::Ceil(a) => format!("ceil({})", print_expr(a)),
        Expr::Log2(a) => format!("log2({})", print_expr(a)),
        Expr::Factorial(a) => format!("fact({})", print_expr(a)),
        Expr::Max(a, b) => format!("max({}, {})", print_expr(a), print_expr(b)),
        Expr::Min(a, b) => format!("min({}, {})", print_expr(a), print_expr(b)),
        Expr::Call(f, args) => {
            let args: Vec<String> = args.iter().map(print_expr).collect();
            format!("{}({})", f, args.join(", "))
        }
    }
}

fn blevel(b: &BoolExpr) -> u8 {
    match b {
        BoolExpr::Or(..) => 1,
        BoolExpr::And(..) => 2,
        BoolExpr::Not(..) => 3,
        _ => 4,
    }
}

fn bwrap(b: &BoolExpr, min: u8) -> String {
    let s = print_bool(b);
    if blevel(b) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_bool(b: &BoolExpr) -> String {
    match b {
        BoolExpr::True => "true".into(),
        BoolExpr::Cmp(op, x, y) => format!("{} {} {}", print_expr(x), op.symbol(), print_expr(y)),
        BoolExpr::And(x, y) => format!("{} and {}", bwrap(x, 2), bwrap(y, 3)),
        BoolExpr::Or(x, y) => format!("{} or {}", bwrap(x, 1), bwrap(y, 2)),
        BoolExpr::Not(x) => format!("not {}", bwrap(x, 3)),
    }
}

/// One `piece` line per piece.
pub fn print_candidate(cf: &PiecewiseClosedForm) -> String {
    cf.pieces
        .iter()
        .map(|p| format!("piece {} -> {}", print_bool(&p.subdomain), print_expr(&p.body)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Single-line form: the bare body for a global candidate, otherwise the
/// piece lines joined by spaces. Both forms parse back with `parse_candidate`.
pub fn print_candidate_inline(cf: &PiecewiseClosedForm) -> String {
    match cf.pieces.as_slice() {
        [] => String::new(),
        [p] if p.subdomain == BoolExpr::True => print_expr(&p.body),
        _ => print_candidate(cf).replace('\n', " "),
    }
}

pub fn print_system(s: &RecurrenceSystem) -> String {
    let mut out = String::new();
    for f in &s.funcs {
        out.push_str(&format!("def {}({}) pre {} {{\n", f.name, f.params.join(", "), print_bool(&f.pre)));
        for c in &f.cases {
            out.push_str(&format!("  case {} -> {}\n", print_bool(&c.guard), print_expr(&c.body)));
        }
        out.push_str("}\n");
    }
    out.push_str(&format!("entry {}\n", s.entry));
    out
}

pub fn print_file(b: &BenchmarkFile) -> String {
    let mut out = format!("# format-version: {FORMAT_VERSION}\n");
    for (k, v) in &b.headers {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    if let Some(c) = &b.category {
        out.push_str(&format!("category {c}\n"));
    }
    out.push_str(&print_system(&b.system));
    if let Some(cf) = &b.expect {
        out.push_str("expect\n");
        for line in print_candidate(cf).lines() {
            out.push_str(&format!("  {line}\n"));
        }
    }
    out
}
