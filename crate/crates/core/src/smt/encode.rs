//! Translation of call-free expressions and guards to SMT-LIB2.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::model::{BoolExpr, CmpOp, Expr};

/// Accumulates declarations and side constraints while translating.
#[derive(Default, Debug, Clone)]
pub struct Encoder {
    /// Parameter name to SMT symbol.
    pub vars: BTreeMap<String, String>,
    floors: HashMap<Expr, String>,
    aux: Vec<String>,
    side: Vec<String>,
    pows: BTreeSet<BigRational>,
    /// Integer arguments of every power application.
    pow_args: BTreeSet<String>,
    /// Constructs that could not be encoded.
    pub unsupported: BTreeSet<String>,
}

fn int_lit(n: &BigInt) -> String {
    if n.is_negative() {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

fn real_lit(q: &BigRational) -> String {
    let mag = |n: &BigInt| format!("{}.0", n.abs());
    let body = if q.is_integer() {
        mag(q.numer())
    } else {
        format!("(/ {} {})", mag(q.numer()), mag(q.denom()))
    };
    if q.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn pow_name(c: &BigRational) -> String {
    let part = |n: &BigInt| if n.is_negative() { format!("m{}", -n) } else { n.to_string() };
    if c.is_integer() {
        format!("pow_{}", part(c.numer()))
    } else {
        format!("pow_{}_{}", part(c.numer()), c.denom())
    }
}

/// SMT symbol for a parameter.
pub fn var_symbol(name: &str) -> String {
    format!("v_{name}")
}

impl Encoder {
    pub fn new(params: &[String]) -> Self {
        Encoder { vars: params.iter().map(|p| (p.clone(), var_symbol(p))).collect(), ..Default::default() }
    }

    fn var(&mut self, v: &str) -> String {
        self.vars.entry(v.to_string()).or_insert_with(|| var_symbol(v)).clone()
    }

    fn floor_var(&mut self, e: &Expr, ceil: bool) -> String {
        let key = if ceil { Expr::ceil(e.clone()) } else { Expr::floor(e.clone()) };
        if let Some(q) = self.floors.get(&key) {
            return q.clone();
        }
        let q = format!("q_{}", self.floors.len());
        let a = self.real(e);
        self.aux.push(format!("(declare-fun {q} () Int)"));
        if ceil {
            self.side.push(format!("(< (- (to_real {q}) 1.0) {a})"));
            self.side.push(format!("(<= {a} (to_real {q}))"));
        } else {
            self.side.push(format!("(<= (to_real {q}) {a})"));
            self.side.push(format!("(< {a} (+ (to_real {q}) 1.0))"));
        }
        self.floors.insert(key, q.clone());
        q
    }

    /// Integer-sorted translation, for expressions that are integers by
    /// construction.
    pub fn int(&mut self, e: &Expr) -> Option<String> {
        Some(match e {
            Expr::Const(c) if c.is_integer() => int_lit(c.numer()),
            Expr::Var(v) => self.var(v),
            Expr::Add(a, b) => format!("(+ {} {})", self.int(a)?, self.int(b)?),
            Expr::Sub(a, b) => format!("(- {} {})", self.int(a)?, self.int(b)?),
            Expr::Mul(a, b) => format!("(* {} {})", self.int(a)?, self.int(b)?),
            Expr::Floor(a) => self.floor_var(a, false),
            Expr::Ceil(a) => self.floor_var(a, true),
            Expr::Max(a, b) | Expr::Min(a, b) => {
                let (x, y) = (self.int(a)?, self.int(b)?);
                let op = if matches!(e, Expr::Max(..)) { ">=" } else { "<=" };
                format!("(ite ({op} {x} {y}) {x} {y})")
            }
            Expr::Pow(a, n) => {
                let k = n.as_const().filter(|k| k.is_integer() && !k.is_negative())?.to_integer().to_u32()?;
                if k > 16 {
                    return None;
                }
                if k == 0 {
                    return Some("1".into());
                }
                let a = self.int(a)?;
                if k == 1 {
                    a
                } else {
                    format!("(* {})", vec![a; k as usize].join(" "))
                }
            }
            _ => return None,
        })
    }

    /// Real-sorted translation. Unsupported nodes are recorded and replaced
    /// by `0.0`.
    pub fn real(&mut self, e: &Expr) -> String {
        match e {
            Expr::Const(c) => real_lit(c),
            Expr::Var(v) => format!("(to_real {})", self.var(v)),
            Expr::Add(a, b) => format!("(+ {} {})", self.real(a), self.real(b)),
            Expr::Sub(a, b) => format!("(- {} {})", self.real(a), self.real(b)),
            Expr::Mul(a, b) => format!("(* {} {})", self.real(a), self.real(b)),
            Expr::Div(a, b) => match b.as_const() {
                Some(c) if !c.is_zero() => format!("(/ {} {})", self.real(a), real_lit(c)),
                _ => {
                    self.unsupported.insert("division by a non-constant".into());
                    "0.0".into()
                }
            },
            Expr::Floor(a) => format!("(to_real {})", self.floor_var(a, false)),
            Expr::Ceil(a) => format!("(to_real {})", self.floor_var(a, true)),
            Expr::Max(a, b) | Expr::Min(a, b) => {
                let (x, y) = (self.real(a), self.real(b));
                let op = if matches!(e, Expr::Max(..)) { ">=" } else { "<=" };
                format!("(ite ({op} {x} {y}) {x} {y})")
            }
            Expr::Pow(a, n) => {
                if let Some(k) = n.as_const() {
                    if k.is_integer() {
                        let k = k.to_integer();
                        let a_s = self.real(a);
                        match k.abs().to_u32() {
                            Some(0) => return "1.0".into(),
                            Some(m) if m <= 16 => {
                                let prod = if m == 1 { a_s } else { format!("(* {})", vec![a_s; m as usize].join(" ")) };
                                return if k.is_negative() { format!("(/ 1.0 {prod})") } else { prod };
                            }
                            _ => {}
                        }
                    }
                    self.unsupported.insert(format!("power with exponent {}", crate::model::rational_to_string(k)));
                    return "0.0".into();
                }
                match a.as_const() {
                    Some(c) if !c.is_zero() => match self.int(n) {
                        Some(g) => {
                            self.pows.insert(c.clone());
                            self.pow_args.insert(g.clone());
                            format!("({} {g})", pow_name(c))
                        }
                        None => {
                            self.unsupported.insert("exponent that is not an integer term".into());
                            "0.0".into()
                        }
                    },
                    _ => {
                        self.unsupported.insert("power with non-constant base and exponent".into());
                        "0.0".into()
                    }
                }
            }
            Expr::Log2(_) => {
                self.unsupported.insert("log2".into());
                "0.0".into()
            }
            Expr::Factorial(_) => {
                self.unsupported.insert("factorial".into());
                "0.0".into()
            }
            Expr::Call(f, _) => {
                self.unsupported.insert(format!("call to {f}"));
                "0.0".into()
            }
        }
    }

    pub fn boolean(&mut self, b: &BoolExpr) -> String {
        match b {
            BoolExpr::True => "true".into(),
            BoolExpr::Cmp(op, l, r) => {
                let (l, r) = (self.real(l), self.real(r));
                match op {
                    CmpOp::Ne => format!("(not (= {l} {r}))"),
                    _ => format!("({} {l} {r})", op.symbol()),
                }
            }
            BoolExpr::And(a, b) => format!("(and {} {})", self.boolean(a), self.boolean(b)),
            BoolExpr::Or(a, b) => format!("(or {} {})", self.boolean(a), self.boolean(b)),
            BoolExpr::Not(a) => format!("(not {})", self.boolean(a)),
        }
    }

    pub fn has_powers(&self) -> bool {
        !self.pows.is_empty()
    }

    /// Declarations, axioms and side constraints, ending before the main
    /// assertion. With `table = Some(r)` powers are tabulated on
    /// `[-r, r]` and every exponent is confined to that range, which keeps
    /// the query quantifier-free.
    pub fn preamble(&self, table: Option<u32>) -> String {
        let Some(r) = table else { return self.quantified() };
        let mut out = String::from("(set-logic ALL)\n");
        for s in self.vars.values() {
            out.push_str(&format!("(declare-fun {s} () Int)\n"));
        }
        for s in self.vars.values() {
            out.push_str(&format!("(assert (>= {s} 0))\n"));
        }
        for c in &self.pows {
            let mut body = "0.0".to_string();
            for k in (-(r as i64)..=r as i64).rev() {
                let v = if k >= 0 {
                    num_traits::pow::Pow::pow(c, k as u32)
                } else {
                    num_traits::pow::Pow::pow(c.recip(), (-k) as u32)
                };
                body = format!("(ite (= n {}) {} {body})", int_lit(&BigInt::from(k)), real_lit(&v));
            }
            out.push_str(&format!("(define-fun {} ((n Int)) Real {body})\n", pow_name(c)));
        }
        for g in &self.pow_args {
            out.push_str(&format!("(assert (<= (- {r}) {g} {r}))\n"));
        }
        for a in &self.aux {
            out.push_str(a);
            out.push('\n');
        }
        for s in &self.side {
            out.push_str(&format!("(assert {s})\n"));
        }
        out
    }

    fn quantified(&self) -> String {
        let mut out = String::from("(set-logic ALL)\n");
        for s in self.vars.values() {
            out.push_str(&format!("(declare-fun {s} () Int)\n"));
        }
        for s in self.vars.values() {
            out.push_str(&format!("(assert (>= {s} 0))\n"));
        }
        for c in &self.pows {
            let p = pow_name(c);
            let c_s = real_lit(c);
            out.push_str(&format!("(declare-fun {p} (Int) Real)\n"));
            out.push_str(&format!("(assert (= ({p} 0) 1.0))\n"));
            out.push_str(&format!(
                "(assert (forall ((n Int)) (! (= ({p} (+ n 1)) (* {c_s} ({p} n))) :pattern (({p} (+ n 1))))))\n"
            ));
            out.push_str(&format!(
                "(assert (forall ((n Int)) (! (= ({p} n) (* (/ 1.0 {c_s}) ({p} (+ n 1)))) :pattern (({p} n)))))\n"
            ));
            if c.is_positive() {
                out.push_str(&format!("(assert (forall ((n Int)) (! (> ({p} n) 0.0) :pattern (({p} n)))))\n"));
            }
            if c >= &BigRational::one() {
                out.push_str(&format!(
                    "(assert (forall ((n Int)) (! (=> (>= n 0) (>= ({p} n) 1.0)) :pattern (({p} n)))))\n"
                ));
            }
        }
        for a in &self.aux {
            out.push_str(a);
            out.push('\n');
        }
        for s in &self.side {
            out.push_str(&format!("(assert {s})\n"));
        }
        out
    }
}
