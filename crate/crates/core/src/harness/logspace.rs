//! Log-magnitude evaluation for points where exact values overflow.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::model::{BoolExpr, Expr, PiecewiseClosedForm};
use crate::value::{Env, EvalError, Num, Semantics};

/// A real number stored as sign and natural log of its magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mag {
    Zero,
    Val { neg: bool, ln: f64 },
}

fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * LN_2
}

/// `ln(n!)`: exact summation for small `n`, Stirling's series otherwise.
pub fn ln_factorial(n: f64) -> f64 {
    if n < 32.0 {
        return (2..=n as u64).map(|k| (k as f64).ln()).sum();
    }
    let z = n + 1.0;
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * z) - 1.0 / (360.0 * z.powi(3))
}

impl Mag {
    pub fn from_f64(v: f64) -> Option<Mag> {
        if !v.is_finite() {
            None
        } else if v == 0.0 {
            Some(Mag::Zero)
        } else {
            Some(Mag::Val { neg: v < 0.0, ln: v.abs().ln() })
        }
    }

    pub fn from_rational(r: &BigRational) -> Mag {
        if r.is_zero() {
            Mag::Zero
        } else {
            Mag::Val { neg: r.is_negative(), ln: ln_big(r.numer()) - ln_big(r.denom()) }
        }
    }

    pub fn from_num(n: &Num) -> Option<Mag> {
        match n {
            Num::Exact(r) => Some(Mag::from_rational(r)),
            Num::Approx(v) => Mag::from_f64(*v),
        }
    }

    /// Value as a double; infinite when out of range.
    pub fn to_f64(self) -> f64 {
        match self {
            Mag::Zero => 0.0,
            Mag::Val { neg, ln } => {
                let m = ln.exp();
                if neg {
                    -m
                } else {
                    m
                }
            }
        }
    }

    fn negate(self) -> Mag {
        match self {
            Mag::Zero => Mag::Zero,
            Mag::Val { neg, ln } => Mag::Val { neg: !neg, ln },
        }
    }

    pub fn add(self, o: Mag) -> Mag {
        match (self, o) {
            (Mag::Zero, x) | (x, Mag::Zero) => x,
            (Mag::Val { neg: n1, ln: l1 }, Mag::Val { neg: n2, ln: l2 }) => {
                let (hi, lo, neg) = if l1 >= l2 { (l1, l2, n1) } else { (l2, l1, n2) };
                if n1 == n2 {
                    Mag::Val { neg, ln: hi + (lo - hi).exp().ln_1p() }
                } else {
                    let d = -(lo - hi).exp();
                    if d <= -1.0 {
                        Mag::Zero
                    } else {
                        Mag::Val { neg, ln: hi + d.ln_1p() }
                    }
                }
            }
        }
    }

    pub fn mul(self, o: Mag) -> Mag {
        match (self, o) {
            (Mag::Zero, _) | (_, Mag::Zero) => Mag::Zero,
            (Mag::Val { neg: n1, ln: l1 }, Mag::Val { neg: n2, ln: l2 }) => Mag::Val { neg: n1 != n2, ln: l1 + l2 },
        }
    }

    pub fn div(self, o: Mag) -> Option<Mag> {
        match o {
            Mag::Zero => None,
            Mag::Val { neg, ln } => Some(self.mul(Mag::Val { neg, ln: -ln })),
        }
    }

    pub fn cmp(self, o: Mag) -> Ordering {
        let key = |m: Mag| match m {
            Mag::Zero => (1, 0.0),
            Mag::Val { neg: true, ln } => (0, -ln),
            Mag::Val { neg: false, ln } => (2, ln),
        };
        let (a, b) = (key(self), key(o));
        a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
    }

    /// `|ln|x||` as a number, used by the exponential-class test.
    pub fn log_abs(self) -> Option<Mag> {
        match self {
            Mag::Zero => None,
            Mag::Val { ln, .. } => Mag::from_f64(ln),
        }
    }
}

fn pow(b: Mag, e: Mag) -> Option<Mag> {
    let x = e.to_f64();
    if !x.is_finite() {
        return None;
    }
    match b {
        Mag::Zero => match x.partial_cmp(&0.0)? {
            Ordering::Greater => Some(Mag::Zero),
            Ordering::Equal => Mag::from_f64(1.0),
            Ordering::Less => None,
        },
        Mag::Val { neg, ln } => {
            if neg && x.fract() != 0.0 {
                return None;
            }
            let odd = neg && (x.abs() % 2.0) == 1.0;
            Some(Mag::Val { neg: odd, ln: ln * x })
        }
    }
}

/// The value as a double, snapped to the nearest integer when it is one up
/// to rounding in the log domain. `None` above 2^52 where that is moot.
fn snapped(m: Mag) -> Option<f64> {
    let v = m.to_f64();
    if v.abs() >= 2f64.powi(52) {
        return None;
    }
    let r = v.round();
    Some(if (v - r).abs() <= 1e-9 * v.abs().max(1.0) { r } else { v })
}

fn round_to(m: Mag, f: fn(f64) -> f64) -> Option<Mag> {
    match snapped(m) {
        Some(v) => Mag::from_f64(f(v)),
        None => Some(m),
    }
}

/// An exact value where possible, a log magnitude after overflow.
#[derive(Clone, Debug)]
enum Hy {
    Exact(Num),
    Log(Mag),
}

impl Hy {
    fn mag(&self) -> Option<Mag> {
        match self {
            Hy::Exact(n) => Mag::from_num(n),
            Hy::Log(m) => Some(*m),
        }
    }

    fn num(&self) -> Option<&Num> {
        match self {
            Hy::Exact(n) => Some(n),
            Hy::Log(_) => None,
        }
    }
}

/// Try the exact operation; on overflow, or when an operand is already
/// a log magnitude, use `log` instead.
fn combine(
    args: &[Hy],
    exact: impl FnOnce(&[&Num]) -> Result<Num, EvalError>,
    log: impl FnOnce(&[Mag]) -> Option<Mag>,
) -> Option<Hy> {
    let nums: Option<Vec<&Num>> = args.iter().map(Hy::num).collect();
    if let Some(nums) = nums {
        match exact(&nums) {
            Ok(v) => return Some(Hy::Exact(v)),
            Err(EvalError::Overflow) => {}
            Err(_) => return None,
        }
    }
    let mags: Option<Vec<Mag>> = args.iter().map(Hy::mag).collect();
    log(&mags?).map(Hy::Log)
}

fn hybrid(e: &Expr, env: &Env) -> Option<Hy> {
    let go = |x: &Expr| hybrid(x, env);
    let sem = Semantics::Strict;
    match e {
        Expr::Const(c) => Some(Hy::Exact(Num::Exact(c.clone()))),
        Expr::Var(v) => Some(Hy::Exact(Num::from_bigint(env.get(v)?.clone()))),
        Expr::Add(a, b) => combine(&[go(a)?, go(b)?], |n| n[0].add(n[1]), |m| Some(m[0].add(m[1]))),
        Expr::Sub(a, b) => combine(&[go(a)?, go(b)?], |n| n[0].sub(n[1]), |m| Some(m[0].add(m[1].negate()))),
        Expr::Mul(a, b) => combine(&[go(a)?, go(b)?], |n| n[0].mul(n[1]), |m| Some(m[0].mul(m[1]))),
        Expr::Div(a, b) => combine(&[go(a)?, go(b)?], |n| n[0].div(n[1], sem), |m| m[0].div(m[1])),
        Expr::Pow(a, b) => combine(&[go(a)?, go(b)?], |n| n[0].pow(n[1]), |m| pow(m[0], m[1])),
        Expr::Floor(a) => combine(&[go(a)?], |n| n[0].floor(), |m| round_to(m[0], f64::floor)),
        Expr::Ceil(a) => combine(&[go(a)?], |n| n[0].ceil(), |m| round_to(m[0], f64::ceil)),
        Expr::Log2(a) => combine(&[go(a)?], |n| n[0].log2(sem), |m| match m[0] {
            Mag::Val { neg: false, ln } => Mag::from_f64(ln / LN_2),
            _ => None,
        }),
        Expr::Factorial(a) => combine(&[go(a)?], |n| n[0].factorial(), |m| {
            let v = snapped(m[0])?;
            if !v.is_finite() || v < 0.0 || v.fract() != 0.0 {
                return None;
            }
            Some(Mag::Val { neg: false, ln: if v < 2.0 { 0.0 } else { ln_factorial(v) } })
        }),
        Expr::Max(a, b) | Expr::Min(a, b) => {
            let (x, y) = (go(a)?, go(b)?);
            let ord = match (x.num(), y.num()) {
                (Some(p), Some(q)) => p.compare(q),
                _ => x.mag()?.cmp(y.mag()?),
            };
            let first = (ord != Ordering::Less) == matches!(e, Expr::Max(..));
            Some(if first { x } else { y })
        }
        Expr::Call(..) => None,
    }
}

/// Evaluate with strict semantics, switching to log magnitudes for
/// subterms that overflow. `None` when undefined.
pub fn value(e: &Expr, env: &Env) -> Option<Mag> {
    hybrid(e, env)?.mag()
}

pub fn holds(b: &BoolExpr, env: &Env) -> Option<bool> {
    match b {
        BoolExpr::True => Some(true),
        BoolExpr::Cmp(op, l, r) => {
            let (x, y) = (hybrid(l, env)?, hybrid(r, env)?);
            let ord = match (x.num(), y.num()) {
                (Some(p), Some(q)) => p.compare(q),
                _ => x.mag()?.cmp(y.mag()?),
            };
            Some(op.holds(ord))
        }
        BoolExpr::And(a, b) => Some(holds(a, env)? && holds(b, env)?),
        BoolExpr::Or(a, b) => Some(holds(a, env)? || holds(b, env)?),
        BoolExpr::Not(a) => Some(!holds(a, env)?),
    }
}

/// Value of a piecewise form at `env`, or `None` when no piece applies or
/// the piece is undefined.
pub fn piecewise_value(cf: &PiecewiseClosedForm, env: &Env) -> Option<Mag> {
    for p in &cf.pieces {
        if holds(&p.subdomain, env)? {
            return value(&p.body, env);
        }
    }
    None
}
