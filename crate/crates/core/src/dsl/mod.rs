//! Text format for benchmark files, candidate printing, and reports.

mod lex;
mod print;
pub mod report;

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{BoolExpr, Case, CmpOp, Expr, FuncDef, ModelError, Piece, PiecewiseClosedForm, RecurrenceSystem};
use lex::{Tok, Token};

pub use print::{print_bool, print_candidate, print_candidate_inline, print_expr, print_file, print_system};

pub const FORMAT_VERSION: &str = "1";

pub const CATEGORIES: [&str; 7] = ["scale", "amortized", "max-heavy", "imp", "nested", "misc", "CAS-style"];

const BUILTINS: [&str; 6] = ["floor", "ceil", "log2", "fact", "max", "min"];
const KEYWORDS: [&str; 12] =
    ["def", "pre", "case", "entry", "expect", "piece", "category", "and", "or", "not", "true", "false"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Structure(String),
}

impl ParseError {
    fn at(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line, col, msg: msg.into() }
    }
}

/// A parsed benchmark file.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkFile {
    pub name: String,
    pub category: Option<String>,
    pub system: RecurrenceSystem,
    pub expect: Option<PiecewiseClosedForm>,
    /// Header fields other than `format-version`.
    pub headers: BTreeMap<String, String>,
}

impl BenchmarkFile {
    pub fn reconstructed(&self) -> bool {
        self.headers.get("reconstructed").map(|v| v == "true").unwrap_or(false)
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

/// Result of parsing a unary-level expression: the expression and, when it
/// was written as a bare integer literal, its value.
type Lit = (Expr, Option<BigInt>);

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError::at(t.line, t.col, msg))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<(), ParseError> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && !BUILTINS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected a name, found {}", describe(&other))),
        }
    }

    /// Any identifier, builtins and keywords included.
    fn word(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected a word, found {}", describe(&other))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_sym("+") {
                lhs = lhs + self.term()?;
            } else if self.eat_sym("-") {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let (mut lhs, mut lit) = self.unary()?;
        loop {
            if self.eat_sym("*") {
                lhs = lhs * self.unary()?.0;
            } else if self.eat_sym("/") {
                let (rhs, rlit) = self.unary()?;
                // `INT / INT` written literally is a rational constant.
                lhs = match (&lit, &rlit) {
                    (Some(n), Some(d)) if d.is_positive() => {
                        Expr::Const(BigRational::new(n.clone(), d.clone()))
                    }
                    _ => lhs / rhs,
                };
            } else {
                return Ok(lhs);
            }
            lit = None;
        }
    }

    fn unary(&mut self) -> Result<Lit, ParseError> {
        if self.eat_sym("-") {
            let (inner, lit) = self.unary()?;
            return Ok(match lit {
                Some(v) if v.is_positive() || v.is_zero() => {
                    let n = -v;
                    (Expr::Const(BigRational::from_integer(n.clone())), Some(n))
                }
                _ => (Expr::int(-1) * inner, None),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Lit, ParseError> {
        let base = self.postfix()?;
        if self.eat_sym("^") {
            let (exp, _) = self.unary()?;
            return Ok((Expr::pow(base.0, exp), None));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Lit, ParseError> {
        let mut p = self.primary()?;
        while self.is_sym("!") && !matches!(self.peek_at(1), Tok::Sym("=")) {
            self.bump();
            p = (Expr::fact(p.0), None);
        }
        Ok(p)
    }

    fn primary(&mut self) -> Result<Lit, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok((Expr::Const(BigRational::from_integer(v.clone())), Some(v)))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok((e, None))
            }
            Tok::Ident(s) if BUILTINS.contains(&s.as_str()) => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.expr()?;
                let e = match s.as_str() {
                    "max" | "min" => {
                        self.expect_sym(",")?;
                        let b = self.expr()?;
                        if s == "max" {
                            Expr::max(a, b)
                        } else {
                            Expr::min(a, b)
                        }
                    }
                    "floor" => Expr::floor(a),
                    "ceil" => Expr::ceil(a),
                    "log2" => Expr::log2(a),
                    _ => Expr::fact(a),
                };
                self.expect_sym(")")?;
                Ok((e, None))
            }
            Tok::Ident(_) => {
                let n = self.name()?;
                if self.eat_sym("(") {
                    let mut args = vec![];
                    if !self.is_sym(")") {
                        args.push(self.expr()?);
                        while self.eat_sym(",") {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect_sym(")")?;
                    Ok((Expr::Call(n, args), None))
                } else {
                    Ok((Expr::Var(n), None))
                }
            }
            other => self.err(format!("expected an expression, found {}", describe(&other))),
        }
    }

    fn boolean(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.conj()?;
        while self.is_kw("or") {
            self.bump();
            lhs = BoolExpr::or(lhs, self.conj()?);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.negation()?;
        while self.is_kw("and") {
            self.bump();
            lhs = BoolExpr::and(lhs, self.negation()?);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<BoolExpr, ParseError> {
        if self.is_kw("not") {
            self.bump();
            return Ok(BoolExpr::not(self.negation()?));
        }
        self.bool_atom()
    }

    fn bool_atom(&mut self) -> Result<BoolExpr, ParseError> {
        if self.is_kw("true") {
            self.bump();
            return Ok(BoolExpr::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(BoolExpr::falsity());
        }
        if self.is_sym("(") {
            // A parenthesis opens either a formula or an arithmetic operand.
            let save = self.pos;
            self.bump();
            if let Ok(b) = self.boolean() {
                if self.eat_sym(")") && cmp_op(self.peek()).is_none() && !self.is_arith_op() {
                    return Ok(b);
                }
            }
            self.pos = save;
        }
        let a = self.expr()?;
        let op = match cmp_op(self.peek()) {
            Some(op) => op,
            None => return self.err(format!("expected a comparison, found {}", describe(self.peek()))),
        };
        self.bump();
        let b = self.expr()?;
        Ok(BoolExpr::Cmp(op, a, b))
    }

    fn is_arith_op(&self) -> bool {
        ["+", "-", "*", "/", "^", "!"].iter().any(|s| self.is_sym(s))
    }

    fn piecewise(&mut self) -> Result<Vec<(BoolExpr, Expr)>, ParseError> {
        let mut pieces = vec![];
        while self.is_kw("piece") {
            self.bump();
            let b = self.boolean()?;
            self.expect_sym("->")?;
            let e = self.expr()?;
            pieces.push((b, e));
        }
        if pieces.is_empty() {
            return self.err("expected `piece`");
        }
        Ok(pieces)
    }

    fn funcdef(&mut self) -> Result<FuncDef, ParseError> {
        self.expect_kw("def")?;
        let name = self.name()?;
        self.expect_sym("(")?;
        let mut params = vec![];
        if !self.is_sym(")") {
            params.push(self.name()?);
            while self.eat_sym(",") {
                params.push(self.name()?);
            }
        }
        self.expect_sym(")")?;
        let pre = if self.is_kw("pre") {
            self.bump();
            self.boolean()?
        } else {
            BoolExpr::True
        };
        self.expect_sym("{")?;
        let mut cases = vec![];
        while self.is_kw("case") {
            self.bump();
            let guard = self.boolean()?;
            self.expect_sym("->")?;
            let body = self.expr()?;
            self.eat_sym(";");
            cases.push(Case { guard, body });
        }
        self.expect_sym("}")?;
        Ok(FuncDef { name, params, pre, cases })
    }
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Sym("=") => CmpOp::Eq,
        Tok::Sym("!=") => CmpOp::Ne,
        Tok::Sym("<") => CmpOp::Lt,
        Tok::Sym("<=") => CmpOp::Le,
        Tok::Sym(">") => CmpOp::Gt,
        Tok::Sym(">=") => CmpOp::Ge,
        _ => return None,
    })
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

fn parser_for(src: &str) -> Result<(Parser, Vec<(String, String)>), ParseError> {
    let (toks, headers) = lex::lex(src)?;
    Ok((Parser { toks, pos: 0 }, headers))
}

fn finish(p: &Parser) -> Result<(), ParseError> {
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {}", describe(p.peek())));
    }
    Ok(())
}

/// Parse a benchmark file. `name` is used as the benchmark name.
pub fn parse_named(src: &str, name: &str) -> Result<BenchmarkFile, ParseError> {
    let (mut p, header_list) = parser_for(src)?;
    let mut headers = BTreeMap::new();
    for (k, v) in header_list {
        if k == "format-version" && v != FORMAT_VERSION {
            return Err(ParseError::Structure(format!("unsupported format-version {v}")));
        }
        if k != "format-version" {
            headers.insert(k, v);
        }
    }
    let mut funcs = vec![];
    let mut entry = None;
    let mut expect = None;
    let mut category = None;
    while *p.peek() != Tok::Eof {
        if p.is_kw("def") {
            funcs.push(p.funcdef()?);
        } else if p.is_kw("entry") {
            p.bump();
            entry = Some(p.name()?);
        } else if p.is_kw("expect") {
            p.bump();
            expect = Some(p.piecewise()?);
        } else if p.is_kw("category") {
            p.bump();
            let mut c = p.word()?;
            // Category names may contain hyphens, which lex as symbols.
            while p.is_sym("-") {
                p.bump();
                c = format!("{c}-{}", p.word()?);
            }
            if !CATEGORIES.contains(&c.as_str()) {
                return p.err(format!("unknown category `{c}`"));
            }
            category = Some(c);
        } else {
            return p.err(format!("expected an item, found {}", describe(p.peek())));
        }
    }
    let entry = match entry {
        Some(e) => e,
        None if funcs.len() == 1 => funcs[0].name.clone(),
        None => return Err(ParseError::Structure("missing `entry` declaration".into())),
    };
    let system = RecurrenceSystem { funcs, entry };
    system.validate()?;
    let params = system.entry_func().params.clone();
    let expect = expect.map(|pieces| closed_form(params, pieces));
    if let Some(cf) = &expect {
        check_candidate(cf)?;
    }
    Ok(BenchmarkFile { name: name.to_string(), category, system, expect, headers })
}

pub fn parse(src: &str) -> Result<BenchmarkFile, ParseError> {
    parse_named(src, "unnamed")
}

pub fn parse_file(path: &Path) -> Result<BenchmarkFile, ParseError> {
    let src = std::fs::read_to_string(path).map_err(|e| ParseError::Structure(e.to_string()))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    parse_named(&src, &name)
}

fn closed_form(params: Vec<String>, pieces: Vec<(BoolExpr, Expr)>) -> PiecewiseClosedForm {
    PiecewiseClosedForm {
        params,
        pieces: pieces
            .into_iter()
            .map(|(subdomain, body)| Piece { subdomain, body, score: 1.0, exact: true })
            .collect(),
        score: 1.0,
    }
}

fn check_candidate(cf: &PiecewiseClosedForm) -> Result<(), ParseError> {
    for p in &cf.pieces {
        if p.body.contains_calls() || p.subdomain.contains_calls() {
            return Err(ParseError::Structure("closed form contains a call".into()));
        }
        let mut vars = p.body.free_vars();
        vars.extend(p.subdomain.free_vars());
        if let Some(v) = vars.iter().find(|v| !cf.params.contains(v)) {
            return Err(ParseError::Structure(format!("closed form mentions unknown variable `{v}`")));
        }
    }
    Ok(())
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let (mut p, _) = parser_for(src)?;
    let e = p.expr()?;
    finish(&p)?;
    Ok(e)
}

pub fn parse_bool(src: &str) -> Result<BoolExpr, ParseError> {
    let (mut p, _) = parser_for(src)?;
    let b = p.boolean()?;
    finish(&p)?;
    Ok(b)
}

/// Parse a candidate: either a bare expression or a list of `piece` lines.
pub fn parse_candidate(src: &str, params: &[String]) -> Result<PiecewiseClosedForm, ParseError> {
    let (mut p, _) = parser_for(src)?;
    let cf = if p.is_kw("piece") {
        closed_form(params.to_vec(), p.piecewise()?)
    } else {
        PiecewiseClosedForm::global(params.to_vec(), p.expr()?)
    };
    finish(&p)?;
    check_candidate(&cf)?;
    Ok(cf)
}
