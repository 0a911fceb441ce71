//! Numeric values and ground evaluation of call-free expressions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{BoolExpr, Expr};

pub type Env = BTreeMap<String, BigInt>;

/// Bit budget above which exact values are reported as overflow.
pub const MAX_BITS: u64 = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("magnitude exceeds 2^512")]
    Overflow,
    #[error("{0}")]
    Domain(&'static str),
    #[error("call to `{0}` in a ground expression")]
    UnexpectedCall(String),
    #[error("no case of `{func}` matches {args:?}")]
    NoMatchingCase { func: String, args: Vec<String> },
    #[error("evaluation budget exceeded ({0})")]
    BudgetExceeded(&'static str),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("input violates the precondition")]
    Precondition,
    #[error("no piece covers the point")]
    NoPiece,
}

impl EvalError {
    pub fn is_budget(&self) -> bool {
        matches!(self, EvalError::BudgetExceeded(_))
    }
}

/// How partial operators behave: `Strict` raises, `Guarded` uses the feature
/// conventions (`log2 x = 0` for `x < 1`, `x / 0 = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    Strict,
    Guarded,
}

/// Either an exact rational or a double.
#[derive(Clone, Debug)]
pub enum Num {
    Exact(BigRational),
    Approx(f64),
}

fn check_exact(r: BigRational) -> Result<Num, EvalError> {
    if r.numer().bits() > r.denom().bits() + MAX_BITS {
        return Err(EvalError::Overflow);
    }
    Ok(Num::Exact(r))
}

fn check_approx(v: f64) -> Result<Num, EvalError> {
    if !v.is_finite() || v.abs() > 2f64.powi(MAX_BITS as i32) {
        return Err(EvalError::Overflow);
    }
    Ok(Num::Approx(v))
}

/// Doubles within rounding error of an integer are taken to be that integer
/// before flooring, so that `floor(2^log2(9))` is 9.
fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        v
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Only reachable for values far outside the f64 range.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

fn is_power_of_two(n: &BigInt) -> bool {
    n.is_positive() && n.trailing_zeros() == Some(n.bits() - 1)
}

fn exact_root(n: &BigInt, q: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(q);
    (r.pow(q) == *n).then_some(r)
}

impl Num {
    pub fn int(v: i64) -> Num {
        Num::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_bigint(v: BigInt) -> Num {
        Num::Exact(BigRational::from_integer(v))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => ratio_to_f64(r),
            Num::Approx(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Exact(r) => r.is_zero(),
            Num::Approx(v) => *v == 0.0,
        }
    }

    /// Integer value when this number is integral.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            Num::Exact(r) if r.is_integer() => Some(r.to_integer()),
            Num::Approx(v) if v.fract() == 0.0 && v.is_finite() => BigInt::from_f64(*v),
            _ => None,
        }
    }

    pub fn floor_int(&self) -> Option<BigInt> {
        match self {
            Num::Exact(r) => Some(r.floor().to_integer()),
            Num::Approx(v) => BigInt::from_f64(snap(*v).floor()),
        }
    }

    pub fn compare(&self, other: &Num) -> Ordering {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a.cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()).unwrap_or(Ordering::Equal),
        }
    }

    /// Equality up to a relative tolerance when either side is approximate.
    pub fn approx_eq(&self, other: &Num, rel: f64) -> bool {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
            }
        }
    }

    fn binary(
        &self,
        other: &Num,
        exact: impl Fn(&BigRational, &BigRational) -> BigRational,
        approx: impl Fn(f64, f64) -> f64,
    ) -> Result<Num, EvalError> {
        match (self, other) {
            (Num::Exact(a), Num::Exact(b)) => check_exact(exact(a, b)),
            _ => check_approx(approx(self.to_f64(), other.to_f64())),
        }
    }

    pub fn add(&self, o: &Num) -> Result<Num, EvalError> {
        self.binary(o, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, o: &Num) -> Result<Num, EvalError> {
        self.binary(o, |a, b| a - b, |a, b| a - b)
    }

    pub fn mul(&self, o: &Num) -> Result<Num, EvalError> {
        self.binary(o, |a, b| a * b, |a, b| a * b)
    }

    pub fn div(&self, o: &Num, sem: Semantics) -> Result<Num, EvalError> {
        if o.is_zero() {
            return match sem {
                Semantics::Strict => Err(EvalError::DivisionByZero),
                Semantics::Guarded => Ok(Num::int(0)),
            };
        }
        self.binary(o, |a, b| a / b, |a, b| a / b)
    }

    pub fn pow(&self, e: &Num) -> Result<Num, EvalError> {
        if let (Num::Exact(b), Num::Exact(x)) = (self, e) {
            if x.is_integer() {
                return pow_int(b, &x.to_integer());
            }
            if !b.is_negative() {
                let q = x.denom().to_u32().ok_or(EvalError::Overflow)?;
                if let (Some(n), Some(d)) = (exact_root(b.numer(), q), exact_root(b.denom(), q)) {
                    return pow_int(&BigRational::new(n, d), x.numer());
                }
            }
        }
        let (b, x) = (self.to_f64(), e.to_f64());
        if b < 0.0 && x.fract() != 0.0 {
            return Err(EvalError::Domain("non-real power"));
        }
        if b == 0.0 && x < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        check_approx(b.powf(x))
    }

    pub fn floor(&self) -> Result<Num, EvalError> {
        self.floor_int().map(Num::from_bigint).ok_or(EvalError::Overflow)
    }

    pub fn ceil(&self) -> Result<Num, EvalError> {
        match self {
            Num::Exact(r) => Ok(Num::from_bigint(r.ceil().to_integer())),
            Num::Approx(v) => BigInt::from_f64(snap(*v).ceil()).map(Num::from_bigint).ok_or(EvalError::Overflow),
        }
    }

    pub fn log2(&self, sem: Semantics) -> Result<Num, EvalError> {
        let below_one = self.compare(&Num::int(1)) == Ordering::Less;
        if sem == Semantics::Guarded && below_one {
            return Ok(Num::int(0));
        }
        if self.compare(&Num::int(0)) != Ordering::Greater {
            return Err(EvalError::Domain("log2 of a non-positive value"));
        }
        if let Num::Exact(r) = self {
            if r.denom().is_one() && is_power_of_two(r.numer()) {
                return Ok(Num::int(r.numer().bits() as i64 - 1));
            }
            if r.numer().is_one() && is_power_of_two(r.denom()) {
                return Ok(Num::int(-(r.denom().bits() as i64 - 1)));
            }
            let (n, d) = (r.numer().bits() as i64, r.denom().bits() as i64);
            if n > 1000 || d > 1000 {
                // Ratio too large for f64: shift both sides down first.
                let shift = (n.min(d) - 64).max(0) as usize;
                let a = ratio_to_f64(&BigRational::from_integer(r.numer() >> shift));
                let b = ratio_to_f64(&BigRational::from_integer(r.denom() >> shift));
                return check_approx(a.log2() - b.log2());
            }
        }
        check_approx(self.to_f64().log2())
    }

    pub fn factorial(&self) -> Result<Num, EvalError> {
        let n = self.as_integer().ok_or(EvalError::Domain("factorial of a non-integer"))?;
        if n.is_negative() {
            return Err(EvalError::Domain("factorial of a negative value"));
        }
        let n = n.to_u64().ok_or(EvalError::Overflow)?;
        let mut acc = BigInt::one();
        for k in 2..=n {
            acc *= k;
            if acc.bits() > MAX_BITS {
                return Err(EvalError::Overflow);
            }
        }
        Ok(Num::from_bigint(acc))
    }

    pub fn max(self, o: Num) -> Num {
        if o.compare(&self) == Ordering::Greater {
            o
        } else {
            self
        }
    }

    pub fn min(self, o: Num) -> Num {
        if o.compare(&self) == Ordering::Less {
            o
        } else {
            self
        }
    }
}

fn pow_int(b: &BigRational, n: &BigInt) -> Result<Num, EvalError> {
    if b.is_zero() {
        return match n.sign() {
            num_bigint::Sign::Minus => Err(EvalError::DivisionByZero),
            num_bigint::Sign::NoSign => Ok(Num::int(1)),
            num_bigint::Sign::Plus => Ok(Num::int(0)),
        };
    }
    let abs = b.abs();
    if abs.is_one() {
        let odd = n.bit(0);
        return Ok(if b.is_negative() && odd { Num::int(-1) } else { Num::int(1) });
    }
    let size = abs.numer().bits().max(abs.denom().bits()).max(2) - 1;
    let e = n.abs().to_u64().ok_or(EvalError::Overflow)?;
    if size.saturating_mul(e) > MAX_BITS + 64 {
        return Err(EvalError::Overflow);
    }
    let e = e as u32;
    let p = BigRational::new(b.numer().pow(e), b.denom().pow(e));
    check_exact(if n.is_negative() { p.recip() } else { p })
}

impl PartialEq for Num {
    fn eq(&self, other: &Num) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

/// Evaluate an expression, delegating calls to `call`.
pub fn eval_with(
    e: &Expr,
    env: &Env,
    sem: Semantics,
    call: &mut dyn FnMut(&str, Vec<BigInt>) -> Result<Num, EvalError>,
) -> Result<Num, EvalError> {
    let mut go = |x: &Expr| eval_with(x, env, sem, &mut *call);
    match e {
        Expr::Const(c) => Ok(Num::Exact(c.clone())),
        Expr::Var(v) => env
            .get(v)
            .map(|x| Num::from_bigint(x.clone()))
            .ok_or_else(|| EvalError::Unbound(v.clone())),
        Expr::Add(a, b) => go(a)?.add(&go(b)?),
        Expr::Sub(a, b) => go(a)?.sub(&go(b)?),
        Expr::Mul(a, b) => go(a)?.mul(&go(b)?),
        Expr::Div(a, b) => go(a)?.div(&go(b)?, sem),
        Expr::Pow(a, b) => go(a)?.pow(&go(b)?),
        Expr::Floor(a) => go(a)?.floor(),
        Expr::Ceil(a) => go(a)?.ceil(),
        Expr::Log2(a) => go(a)?.log2(sem),
        Expr::Factorial(a) => go(a)?.factorial(),
        Expr::Max(a, b) => Ok(go(a)?.max(go(b)?)),
        Expr::Min(a, b) => Ok(go(a)?.min(go(b)?)),
        Expr::Call(f, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                let v = go(a)?;
                // Non-integer arguments are floored.
                vals.push(v.floor_int().ok_or(EvalError::Overflow)?);
            }
            call(f, vals)
        }
    }
}

pub fn eval_bool_with(
    b: &BoolExpr,
    env: &Env,
    call: &mut dyn FnMut(&str, Vec<BigInt>) -> Result<Num, EvalError>,
) -> Result<bool, EvalError> {
    match b {
        BoolExpr::True => Ok(true),
        BoolExpr::Cmp(op, x, y) => {
            let a = eval_with(x, env, Semantics::Strict, &mut *call)?;
            let c = eval_with(y, env, Semantics::Strict, &mut *call)?;
            Ok(op.holds(a.compare(&c)))
        }
        BoolExpr::And(x, y) => Ok(eval_bool_with(x, env, call)? && eval_bool_with(y, env, call)?),
        BoolExpr::Or(x, y) => Ok(eval_bool_with(x, env, call)? || eval_bool_with(y, env, call)?),
        BoolExpr::Not(x) => Ok(!eval_bool_with(x, env, call)?),
    }
}

fn no_calls(f: &str, _: Vec<BigInt>) -> Result<Num, EvalError> {
    Err(EvalError::UnexpectedCall(f.to_string()))
}

/// Evaluate a call-free expression with strict semantics.
pub fn eval_ground(e: &Expr, env: &Env) -> Result<Num, EvalError> {
    eval_with(e, env, Semantics::Strict, &mut no_calls)
}

/// Evaluate a call-free expression with guarded feature semantics.
pub fn eval_guarded(e: &Expr, env: &Env) -> Result<Num, EvalError> {
    eval_with(e, env, Semantics::Guarded, &mut no_calls)
}

pub fn eval_bool(b: &BoolExpr, env: &Env) -> Result<bool, EvalError> {
    eval_bool_with(b, env, &mut no_calls)
}

pub fn env_of(names: &[String], point: &[i64]) -> Env {
    names.iter().cloned().zip(point.iter().map(|&v| BigInt::from(v))).collect()
}
