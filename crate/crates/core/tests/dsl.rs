mod common;

use proptest::prelude::*;
use recsolve::dsl::{parse, parse_candidate, parse_expr, print_expr, print_file, ParseError};
use recsolve::model::{Expr, ModelError};

#[test]
fn corpus_files_parse_and_round_trip() {
    let files = common::corpus();
    assert!(files.len() >= 20);
    for f in &files {
        let again = parse(&print_file(f)).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        assert_eq!(again.system, f.system, "{}", f.name);
        assert_eq!(again.category, f.category, "{}", f.name);
        assert_eq!(again.expect.as_ref().map(|c| &c.pieces), f.expect.as_ref().map(|c| &c.pieces), "{}", f.name);
    }
}

#[test]
fn hyphenated_categories() {
    for cat in ["CAS-style", "max-heavy", "imp"] {
        let src = format!("category {cat}\ndef f(x) pre x >= 0 {{ case true -> x }}\nentry f");
        assert_eq!(parse(&src).unwrap().category.as_deref(), Some(cat));
    }
    let bad = parse("category sideways\ndef f(x) pre x >= 0 { case true -> x }\nentry f");
    assert!(bad.is_err());
}

#[test]
fn headers_are_recorded() {
    let f = parse("# format-version: 1\n# reconstructed: true\ndef f(x) pre x >= 0 { case true -> x }\nentry f").unwrap();
    assert!(f.reconstructed());
}

#[test]
fn precedence() {
    let e = parse_expr("1 + 2 * x ^ 2").unwrap();
    assert_eq!(e, Expr::int(1) + Expr::int(2) * Expr::pow(Expr::var("x"), Expr::int(2)));
    let e = parse_expr("2 ^ x ^ 2").unwrap();
    assert_eq!(e, Expr::pow(Expr::int(2), Expr::pow(Expr::var("x"), Expr::int(2))));
    let e = parse_expr("x - y - 1").unwrap();
    assert_eq!(e, (Expr::var("x") - Expr::var("y")) - Expr::int(1));
    assert_eq!(parse_expr("n!").unwrap(), Expr::fact(Expr::var("n")));
    assert_eq!(parse_expr("fact(n)").unwrap(), Expr::fact(Expr::var("n")));
}

#[test]
fn syntax_errors_carry_positions() {
    match parse("def f(x) pre x >= 0 {\n  case x > 0 -> x +\n}\nentry f") {
        Err(ParseError::Syntax { line, .. }) => assert!(line >= 2),
        other => panic!("expected a syntax error, got {other:?}"),
    }
}

#[test]
fn structural_errors() {
    let unknown = parse("def f(x) pre x >= 0 { case x > 0 -> g(x - 1) case x = 0 -> 0 }\nentry f");
    assert!(matches!(unknown, Err(ParseError::Model(ModelError::UnknownFunction(_)))));
    let arity = parse("def f(x) pre x >= 0 { case x > 0 -> f(x, 1) case x = 0 -> 0 }\nentry f");
    assert!(matches!(arity, Err(ParseError::Model(ModelError::Arity { .. }))));
    let free = parse("def f(x) pre x >= 0 { case x > 0 -> y }\nentry f");
    assert!(matches!(free, Err(ParseError::Model(ModelError::FreeVariable { .. }))));
    let guard = parse("def f(x) pre x >= 0 { case f(x) > 0 -> 1 }\nentry f");
    assert!(guard.is_err());
}

#[test]
fn candidates_single_and_piecewise() {
    let p = vec!["x".to_string()];
    let c = parse_candidate("2*x + 1", &p).unwrap();
    assert_eq!(c.pieces.len(), 1);
    let c = parse_candidate("piece x = 0 -> 0\npiece x > 0 -> x", &p).unwrap();
    assert_eq!(c.pieces.len(), 2);
    assert!(parse_candidate("y", &p).is_err());
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in common::expr(&["x", "y"], 4)) {
        let text = print_expr(&e);
        let back = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "printed as {}", text);
    }
}
