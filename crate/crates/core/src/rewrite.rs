//! Algebraic simplification.
//!
//! Expressions are normalized to sums of monomials with exact rational
//! coefficients. Anything that is not a sum, product or integer power becomes
//! an opaque atom whose own arguments are normalized recursively. Powers with
//! a constant positive base are kept as exponentials keyed by base, so
//! `2^(x+1) - 2*2^x` cancels. All rules assume variables range over the
//! naturals.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::model::{BoolExpr, CmpOp, Expr};
use crate::value::Num;

type Q = BigRational;

/// Upper bound on simplification passes.
pub const MAX_PASSES: usize = 20;

/// Largest integer exponent split out of an exponential into its coefficient.
const MAX_SPLIT: i64 = 256;
/// Largest polynomial expansion (number of terms) performed for `p^k`.
const MAX_EXPANSION: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
struct Mono {
    factors: BTreeMap<Expr, u32>,
    exps: BTreeMap<Q, Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
struct Poly {
    terms: BTreeMap<Mono, Q>,
}

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

impl Mono {
    fn is_one(&self) -> bool {
        self.factors.is_empty() && self.exps.is_empty()
    }

    fn degree(&self) -> u32 {
        self.factors.values().sum::<u32>() + self.exps.len() as u32
    }
}

impl Poly {
    fn constant(c: Q) -> Poly {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.terms.insert(Mono::default(), c);
        }
        p
    }

    fn atom(e: Expr) -> Poly {
        let mut m = Mono::default();
        m.factors.insert(e, 1);
        Poly::mono(m, Q::one())
    }

    fn mono(m: Mono, c: Q) -> Poly {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    fn as_const(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Mono::default()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Mono, c: Q) {
        let e = self.terms.entry(m).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            let zero_keys: Vec<Mono> = self.terms.iter().filter(|(_, v)| v.is_zero()).map(|(k, _)| k.clone()).collect();
            for k in zero_keys {
                self.terms.remove(&k);
            }
        }
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    fn scale(&self, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::default();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&q(-1)))
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let (k, m) = mul_mono(m1, m2);
                r.add_term(m, c1 * c2 * k);
            }
        }
        r
    }

    fn single(&self) -> Option<(&Mono, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Split into constant term and the rest.
    fn split_const(&self) -> (Q, Poly) {
        let mut rest = self.clone();
        let c = rest.terms.remove(&Mono::default()).unwrap_or_else(Q::zero);
        (c, rest)
    }

    /// Monomial made only of exponentials, with its coefficient.
    fn pure_exp(&self) -> Option<(&Mono, &Q)> {
        self.single().filter(|(m, _)| m.factors.is_empty() && !m.exps.is_empty())
    }
}

/// Product of monomials, with the coefficient produced by re-normalizing
/// merged exponentials.
fn mul_mono(a: &Mono, b: &Mono) -> (Q, Mono) {
    let mut m = a.clone();
    for (f, k) in &b.factors {
        *m.factors.entry(f.clone()).or_insert(0) += k;
    }
    let mut coef = Q::one();
    for (base, e) in &b.exps {
        let merged = match m.exps.remove(base) {
            Some(prev) => prev.add(e),
            None => e.clone(),
        };
        let (k, rest) = exp_parts(base, &merged);
        coef *= k;
        if !rest.terms.is_empty() {
            m.exps.insert(base.clone(), rest);
        }
    }
    (coef, m)
}

/// Split `base^e` into a rational coefficient and the remaining exponent: the
/// integer part of the constant term moves into the coefficient.
fn exp_parts(base: &Q, e: &Poly) -> (Q, Poly) {
    let (c, mut rest) = e.split_const();
    let whole = c.floor();
    let k = whole.to_integer().to_i64().filter(|k| k.abs() <= MAX_SPLIT);
    match k {
        Some(k) => {
            let frac = c - whole;
            if !frac.is_zero() {
                rest.terms.insert(Mono::default(), frac);
            }
            let coef = match Num::Exact(base.clone()).pow(&Num::int(k)) {
                Ok(Num::Exact(v)) => v,
                _ => return (Q::one(), e.clone()),
            };
            (coef, rest)
        }
        None => (Q::one(), e.clone()),
    }
}

fn exp_poly(base: Q, e: Poly) -> Poly {
    if let Some(c) = e.as_const() {
        if let Ok(Num::Exact(v)) = Num::Exact(base.clone()).pow(&Num::Exact(c.clone())) {
            return Poly::constant(v);
        }
        return Poly::atom(Expr::pow(Expr::Const(base), Expr::Const(c)));
    }
    // 2^(log2(a) + k) = 2^k * a
    if base == q(2) {
        let (k, rest) = e.split_const();
        if let Some((m, c)) = rest.single() {
            if c.is_one() && m.exps.is_empty() && m.factors.len() == 1 {
                let (atom, pw) = m.factors.iter().next().unwrap();
                if let (Expr::Log2(inner), 1) = (atom, *pw) {
                    if k.is_integer() {
                        let scale = Num::int(2).pow(&Num::Exact(k)).ok();
                        if let Some(Num::Exact(s)) = scale {
                            return norm(inner).scale(&s);
                        }
                    }
                }
            }
        }
    }
    let (base, e) = reduce_base(base, e);
    let (coef, rest) = exp_parts(&base, &e);
    let mut m = Mono::default();
    if rest.terms.is_empty() {
        return Poly::constant(coef);
    }
    m.exps.insert(base, rest);
    Poly::mono(m, coef)
}

/// Rewrite `b^e` with the smallest integer base: `4^x = 2^(2x)`.
fn reduce_base(base: Q, e: Poly) -> (Q, Poly) {
    if !base.is_integer() || base <= q(1) {
        return (base, e);
    }
    let n = base.to_integer();
    for k in (2..=n.bits() as u32).rev() {
        let r = n.nth_root(k);
        if r.pow(k) == n {
            return (Q::from_integer(r), e.scale(&q(k as i64)));
        }
    }
    (base, e)
}

fn pow_poly(p: &Poly, k: u32) -> Option<Poly> {
    if let Some((m, c)) = p.single() {
        let mut r = Poly::constant(Q::one());
        let single = Poly::mono(m.clone(), Q::one());
        for _ in 0..k {
            r = r.mul(&single);
        }
        let ck = Num::Exact(c.clone()).pow(&Num::int(k as i64)).ok()?;
        return match ck {
            Num::Exact(ck) => Some(r.scale(&ck)),
            _ => None,
        };
    }
    let estimate = (p.terms.len() as f64).powi(k as i32);
    if estimate > MAX_EXPANSION as f64 {
        return None;
    }
    let mut r = Poly::constant(Q::one());
    for _ in 0..k {
        r = r.mul(p);
    }
    Some(r)
}

fn invert_exp(m: &Mono, c: &Q) -> Poly {
    let mut r = Poly::constant(c.recip());
    for (base, e) in &m.exps {
        r = r.mul(&exp_poly(base.clone(), e.scale(&q(-1))));
    }
    r
}

fn is_int_atom(e: &Expr) -> bool {
    match e {
        Expr::Var(_) | Expr::Floor(_) | Expr::Ceil(_) | Expr::Factorial(_) => true,
        Expr::Max(a, b) | Expr::Min(a, b) => is_int_poly(&norm(a)) && is_int_poly(&norm(b)),
        _ => false,
    }
}

fn is_nonneg_atom(e: &Expr) -> bool {
    match e {
        Expr::Var(_) | Expr::Factorial(_) => true,
        Expr::Max(a, b) => is_nonneg_poly(&norm(a)) || is_nonneg_poly(&norm(b)),
        Expr::Min(a, b) => is_nonneg_poly(&norm(a)) && is_nonneg_poly(&norm(b)),
        Expr::Floor(a) | Expr::Ceil(a) => is_nonneg_poly(&norm(a)),
        _ => false,
    }
}

fn is_int_mono(m: &Mono) -> bool {
    m.factors.keys().all(is_int_atom)
        && m.exps.iter().all(|(b, e)| b.is_integer() && is_nonneg_int_poly(e))
}

/// Integer-valued at every point of the naturals where it is defined.
fn is_int_poly(p: &Poly) -> bool {
    p.terms.iter().all(|(m, c)| c.is_integer() && is_int_mono(m))
}

fn is_nonneg_mono(m: &Mono) -> bool {
    m.factors.keys().all(is_nonneg_atom) || m.factors.values().all(|k| k % 2 == 0)
}

fn is_nonneg_poly(p: &Poly) -> bool {
    p.terms.iter().all(|(m, c)| !c.is_negative() && is_nonneg_mono(m))
}

fn is_nonneg_int_poly(p: &Poly) -> bool {
    is_int_poly(p) && is_nonneg_poly(p)
}

fn norm_minmax(a: &Expr, b: &Expr, is_max: bool) -> Poly {
    let (pa, pb) = (norm(a), norm(b));
    if let Some(d) = pa.sub(&pb).as_const() {
        let a_bigger = !d.is_negative();
        return if a_bigger == is_max { pa } else { pb };
    }
    let (ea, eb) = (to_expr(&pa), to_expr(&pb));
    let (lo, hi) = if ea <= eb { (ea, eb) } else { (eb, ea) };
    Poly::atom(if is_max { Expr::max(lo, hi) } else { Expr::min(lo, hi) })
}

fn norm_rounding(a: &Expr, is_floor: bool) -> Poly {
    // floor(I + n + r) = I + n + floor(r) for integer-valued I and integer n.
    let p = norm(a);
    let mut int_part = Poly::default();
    let mut rest = Poly::default();
    for (m, c) in &p.terms {
        if m.is_one() {
            let whole = c.floor();
            int_part.add_term(m.clone(), whole.clone());
            rest.add_term(m.clone(), c - whole);
        } else if c.is_integer() && is_int_mono(m) {
            int_part.add_term(m.clone(), c.clone());
        } else {
            rest.add_term(m.clone(), c.clone());
        }
    }
    if let Some(c) = rest.as_const() {
        let r = if is_floor { c.floor() } else { c.ceil() };
        return int_part.add(&Poly::constant(r));
    }
    let inner = to_expr(&rest);
    int_part.add(&Poly::atom(if is_floor { Expr::floor(inner) } else { Expr::ceil(inner) }))
}

fn norm_log2(a: &Expr) -> Poly {
    let p = norm(a);
    if let Some(c) = p.as_const() {
        if let Ok(Num::Exact(v)) = Num::Exact(c.clone()).log2(crate::value::Semantics::Strict) {
            return Poly::constant(v);
        }
        return Poly::atom(Expr::log2(Expr::Const(c)));
    }
    if let Some((m, c)) = p.pure_exp() {
        if m.exps.len() == 1 && m.exps.contains_key(&q(2)) {
            if let Ok(Num::Exact(k)) = Num::Exact(c.clone()).log2(crate::value::Semantics::Strict) {
                if c.is_positive() {
                    return m.exps[&q(2)].add(&Poly::constant(k));
                }
            }
        }
    }
    Poly::atom(Expr::log2(to_expr(&p)))
}

fn norm_pow(a: &Expr, b: &Expr) -> Poly {
    let (pa, pb) = (norm(a), norm(b));
    if let Some(k) = pb.as_const() {
        if k.is_zero() {
            // a^0 = 1 wherever a^0 is defined, including a = 0.
            return Poly::constant(Q::one());
        }
        if let Some(c) = pa.as_const() {
            return match Num::Exact(c.clone()).pow(&Num::Exact(k.clone())) {
                Ok(Num::Exact(v)) => Poly::constant(v),
                _ => Poly::atom(Expr::pow(Expr::Const(c), Expr::Const(k))),
            };
        }
        if let Some((m, c)) = pa.pure_exp() {
            if c.is_one() {
                let mut r = Poly::constant(Q::one());
                for (base, e) in &m.exps {
                    r = r.mul(&exp_poly(base.clone(), e.scale(&k)));
                }
                return r;
            }
            if k.is_integer() && k.is_negative() {
                let inv = invert_exp(m, c);
                if let Some(r) = k.abs().to_integer().to_u32().and_then(|n| pow_poly(&inv, n)) {
                    return r;
                }
            }
        }
        if k.is_integer() && k.is_positive() {
            if let Some(r) = k.to_integer().to_u32().filter(|n| *n <= 64).and_then(|n| pow_poly(&pa, n)) {
                return r;
            }
        }
        return Poly::atom(Expr::pow(to_expr(&pa), Expr::Const(k)));
    }
    if let Some(c) = pa.as_const() {
        if c.is_one() {
            return Poly::constant(Q::one());
        }
        if c.is_positive() {
            return exp_poly(c, pb);
        }
        return Poly::atom(Expr::pow(Expr::Const(c), to_expr(&pb)));
    }
    if let Some((m, c)) = pa.pure_exp() {
        if c.is_one() {
            let mut r = Poly::constant(Q::one());
            for (base, e) in &m.exps {
                r = r.mul(&exp_poly(base.clone(), e.mul(&pb)));
            }
            return r;
        }
    }
    Poly::atom(Expr::pow(to_expr(&pa), to_expr(&pb)))
}

fn norm(e: &Expr) -> Poly {
    match e {
        Expr::Const(c) => Poly::constant(c.clone()),
        Expr::Var(_) => Poly::atom(e.clone()),
        Expr::Add(a, b) => norm(a).add(&norm(b)),
        Expr::Sub(a, b) => norm(a).sub(&norm(b)),
        Expr::Mul(a, b) => norm(a).mul(&norm(b)),
        Expr::Div(a, b) => {
            let (pa, pb) = (norm(a), norm(b));
            if let Some(c) = pb.as_const() {
                if !c.is_zero() {
                    return pa.scale(&c.recip());
                }
            } else if let Some((m, c)) = pb.pure_exp() {
                return pa.mul(&invert_exp(m, c));
            }
            Poly::atom(Expr::Div(Box::new(to_expr(&pa)), Box::new(to_expr(&pb))))
        }
        Expr::Pow(a, b) => norm_pow(a, b),
        Expr::Floor(a) => norm_rounding(a, true),
        Expr::Ceil(a) => norm_rounding(a, false),
        Expr::Log2(a) => norm_log2(a),
        Expr::Factorial(a) => {
            let p = norm(a);
            if let Some(c) = p.as_const() {
                if c.is_integer() && !c.is_negative() && c <= q(100) {
                    if let Ok(Num::Exact(v)) = Num::Exact(c.clone()).factorial() {
                        return Poly::constant(v);
                    }
                }
            }
            Poly::atom(Expr::fact(to_expr(&p)))
        }
        Expr::Max(a, b) => norm_minmax(a, b, true),
        Expr::Min(a, b) => norm_minmax(a, b, false),
        Expr::Call(f, args) => Poly::atom(Expr::Call(f.clone(), args.iter().map(simplify_once).collect())),
    }
}

fn mono_expr(m: &Mono) -> Option<Expr> {
    let mut parts: Vec<Expr> = vec![];
    for (f, k) in &m.factors {
        parts.push(if *k == 1 { f.clone() } else { Expr::pow(f.clone(), Expr::int(*k as i64)) });
    }
    for (base, e) in &m.exps {
        parts.push(Expr::pow(Expr::Const(base.clone()), to_expr(e)));
    }
    parts.into_iter().reduce(|a, b| a * b)
}

fn term_expr(m: &Mono, c: &Q) -> Expr {
    match mono_expr(m) {
        None => Expr::Const(c.clone()),
        Some(me) if c.is_one() => me,
        Some(me) => Expr::Const(c.clone()) * me,
    }
}

fn to_expr(p: &Poly) -> Expr {
    let mut terms: Vec<(&Mono, &Q)> = p.terms.iter().collect();
    terms.sort_by_key(|(m, _)| (m.is_one(), Reverse(m.degree()), (*m).clone()));
    let mut acc: Option<Expr> = None;
    for (m, c) in terms {
        acc = Some(match acc {
            None => term_expr(m, c),
            Some(a) if c.is_negative() => a - term_expr(m, &-c.clone()),
            Some(a) => a + term_expr(m, c),
        });
    }
    acc.unwrap_or_else(|| Expr::int(0))
}

fn simplify_once(e: &Expr) -> Expr {
    to_expr(&norm(e))
}

/// Normal form of an expression. Numerically equal to the input wherever the
/// input is defined on the naturals.
pub fn simplify(e: &Expr) -> Expr {
    let mut cur = e.clone();
    for _ in 0..MAX_PASSES {
        let next = simplify_once(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Constructs the encoder cannot translate: factorials, surviving logarithms,
/// and powers whose base and exponent are both non-constant.
pub fn contains_unsupported(e: &Expr) -> Vec<String> {
    let mut out = vec![];
    collect_unsupported(e, &mut out);
    out.sort();
    out.dedup();
    out
}

fn collect_unsupported(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Factorial(_) => out.push("factorial".into()),
        Expr::Log2(_) => out.push("log2".into()),
        Expr::Pow(a, b) if a.as_const().is_none() && b.as_const().is_none() => {
            out.push("power with non-constant base and exponent".into())
        }
        _ => {}
    }
    for c in e.children() {
        collect_unsupported(c, out);
    }
}

// ---------------------------------------------------------------------------
// Guards

/// Canonical comparison `R op c`: `R` has coprime integer coefficients with a
/// positive leading term and no constant.
fn canonical_cmp(op: CmpOp, a: &Expr, b: &Expr) -> BoolExpr {
    let d = norm(a).sub(&norm(b));
    let (c, rest) = d.split_const();
    if rest.terms.is_empty() {
        return truth(op.holds(c.cmp(&Q::zero())));
    }
    let lcm = rest.terms.values().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let gcd = rest
        .terms
        .values()
        .fold(BigInt::zero(), |acc, v| acc.gcd(&(v.numer() * &lcm / v.denom())));
    let mut scale = Q::new(lcm, gcd);
    let mut op = op;
    let mut ordered: Vec<(&Mono, &Q)> = rest.terms.iter().collect();
    ordered.sort_by_key(|(m, _)| (Reverse(m.degree()), (*m).clone()));
    if ordered[0].1.is_negative() {
        scale = -scale;
        op = op.flip();
    }
    let lhs = rest.scale(&scale);
    let rhs = -(c * scale);
    BoolExpr::Cmp(op, to_expr(&lhs), Expr::Const(rhs))
}

fn truth(b: bool) -> BoolExpr {
    if b {
        BoolExpr::True
    } else {
        BoolExpr::falsity()
    }
}

/// Integer interval with excluded points.
#[derive(Clone, Debug)]
struct Range {
    lo: Option<BigInt>,
    hi: Option<BigInt>,
    excl: Vec<BigInt>,
}

impl Range {
    fn full(nonneg: bool) -> Range {
        Range { lo: nonneg.then(BigInt::zero), hi: None, excl: vec![] }
    }

    fn restrict(&mut self, op: CmpOp, c: &Q) {
        let lo = |r: &mut Range, v: BigInt| r.lo = Some(r.lo.take().map_or(v.clone(), |o| o.max(v)));
        let hi = |r: &mut Range, v: BigInt| r.hi = Some(r.hi.take().map_or(v.clone(), |o| o.min(v)));
        match op {
            CmpOp::Eq => {
                if c.is_integer() {
                    lo(self, c.to_integer());
                    hi(self, c.to_integer());
                } else {
                    lo(self, BigInt::one());
                    hi(self, BigInt::zero());
                }
            }
            CmpOp::Ne => {
                if c.is_integer() {
                    self.excl.push(c.to_integer());
                }
            }
            CmpOp::Lt => hi(self, c.ceil().to_integer() - 1),
            CmpOp::Le => hi(self, c.floor().to_integer()),
            CmpOp::Gt => lo(self, c.floor().to_integer() + 1),
            CmpOp::Ge => lo(self, c.ceil().to_integer()),
        }
    }

    fn empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(l), Some(h)) => {
                if l > h {
                    return true;
                }
                let width = h - l;
                if width < BigInt::from(64) {
                    let mut v = l.clone();
                    while &v <= h {
                        if !self.excl.contains(&v) {
                            return false;
                        }
                        v += 1;
                    }
                    return true;
                }
                false
            }
            _ => false,
        }
    }

    /// Every point of the range satisfies `op c`.
    fn implies(&self, op: CmpOp, c: &Q) -> bool {
        let mut neg = self.clone();
        neg.restrict(op.negate(), c);
        if op == CmpOp::Eq {
            // The negation of `=` is `!=`; the range implies `= c` iff it is {c}.
            return c.is_integer()
                && self.lo.as_ref() == Some(&c.to_integer())
                && self.hi.as_ref() == Some(&c.to_integer());
        }
        if op == CmpOp::Ne {
            if !c.is_integer() {
                return true;
            }
            let v = c.to_integer();
            return self.excl.contains(&v)
                || self.lo.as_ref().is_some_and(|l| &v < l)
                || self.hi.as_ref().is_some_and(|h| &v > h);
        }
        neg.empty()
    }
}

/// Integer-valued comparison key, and whether it is non-negative on the domain.
fn cmp_key(lhs: &Expr) -> Option<bool> {
    let p = norm(lhs);
    is_int_poly(&p).then(|| is_nonneg_poly(&p))
}

fn simplify_and(items: Vec<BoolExpr>) -> BoolExpr {
    let mut flat: Vec<BoolExpr> = vec![];
    for it in items {
        for c in simplify_bool_once(&it).conjuncts() {
            if c.is_false() {
                return BoolExpr::falsity();
            }
            if !flat.contains(&c) {
                flat.push(c);
            }
        }
    }
    // Interval reasoning per comparison key.
    let keyed: Vec<Option<(Expr, CmpOp, Q, bool)>> = flat
        .iter()
        .map(|c| match c {
            BoolExpr::Cmp(op, l, Expr::Const(k)) => cmp_key(l).map(|nn| (l.clone(), *op, k.clone(), nn)),
            _ => None,
        })
        .collect();
    let mut alive = vec![true; flat.len()];
    let range_without = |skip: usize, alive: &[bool], key: &Expr, nonneg: bool| {
        let mut r = Range::full(nonneg);
        for (j, k) in keyed.iter().enumerate() {
            if j != skip && alive[j] {
                if let Some((l, op, c, _)) = k {
                    if l == key {
                        r.restrict(*op, c);
                    }
                }
            }
        }
        r
    };
    for (key, nonneg) in keyed.iter().flatten().map(|(l, _, _, nn)| (l.clone(), *nn)) {
        if range_without(usize::MAX, &alive, &key, nonneg).empty() {
            return BoolExpr::falsity();
        }
    }
    let mut order: Vec<usize> = (0..flat.len()).rev().collect();
    order.sort_by_key(|&i| !matches!(keyed[i], Some((_, CmpOp::Ne, _, _))));
    for i in order {
        if let Some((l, op, c, nn)) = &keyed[i] {
            if range_without(i, &alive, l, *nn).implies(*op, c) {
                alive[i] = false;
            }
        }
    }
    let mut kept: Vec<BoolExpr> = flat.into_iter().zip(alive).filter(|(_, a)| *a).map(|(c, _)| c).collect();
    // Drop disjuncts contradicted by the plain comparisons beside them.
    let plain: Vec<BoolExpr> = kept.iter().filter(|c| matches!(c, BoolExpr::Cmp(..))).cloned().collect();
    if !plain.is_empty() {
        let mut changed = false;
        for c in kept.iter_mut() {
            if let BoolExpr::Or(..) = c {
                let ds = c.disjuncts();
                let live: Vec<BoolExpr> = ds
                    .iter()
                    .filter(|d| {
                        let mut with = plain.clone();
                        with.push((*d).clone());
                        !simplify_and(with).is_false()
                    })
                    .cloned()
                    .collect();
                if live.len() < ds.len() {
                    *c = BoolExpr::any(live);
                    changed = true;
                }
            }
        }
        if changed {
            return simplify_and(kept);
        }
    }
    // Absorption: a and (a or b) = a.
    let snapshot = kept.clone();
    kept.retain(|c| match c {
        BoolExpr::Or(..) => !c.disjuncts().iter().any(|d| snapshot.contains(d)),
        _ => true,
    });
    for c in &kept {
        if let BoolExpr::Cmp(op, l, r) = c {
            if kept.contains(&BoolExpr::Cmp(op.negate(), l.clone(), r.clone())) {
                return BoolExpr::falsity();
            }
        }
    }
    BoolExpr::all(kept)
}

fn simplify_or(items: Vec<BoolExpr>) -> BoolExpr {
    let mut flat: Vec<BoolExpr> = vec![];
    for it in items {
        let s = simplify_bool_once(&it);
        if s == BoolExpr::True {
            return BoolExpr::True;
        }
        for d in s.disjuncts() {
            if !flat.contains(&d) {
                flat.push(d);
            }
        }
    }
    let snapshot = flat.clone();
    flat.retain(|c| match c {
        BoolExpr::And(..) => !c.conjuncts().iter().any(|d| snapshot.contains(d)),
        _ => true,
    });
    for c in &flat {
        if let BoolExpr::Cmp(op, l, r) = c {
            if flat.contains(&BoolExpr::Cmp(op.negate(), l.clone(), r.clone())) {
                return BoolExpr::True;
            }
        }
    }
    BoolExpr::any(flat)
}

fn simplify_bool_once(b: &BoolExpr) -> BoolExpr {
    match b {
        BoolExpr::True => BoolExpr::True,
        BoolExpr::Cmp(op, l, r) => {
            let c = canonical_cmp(*op, l, r);
            // A single comparison may still be decided by the domain.
            if let BoolExpr::Cmp(op, l, Expr::Const(k)) = &c {
                if let Some(nn) = cmp_key(l) {
                    let r = Range::full(nn);
                    if r.implies(*op, k) {
                        return BoolExpr::True;
                    }
                    let mut r2 = r;
                    r2.restrict(*op, k);
                    if r2.empty() {
                        return BoolExpr::falsity();
                    }
                    // A range pinned to one value is an equation.
                    if let (Some(lo), Some(hi)) = (&r2.lo, &r2.hi) {
                        if lo == hi && *op != CmpOp::Eq {
                            return BoolExpr::Cmp(CmpOp::Eq, l.clone(), Expr::Const(Q::from(lo.clone())));
                        }
                    }
                }
            }
            c
        }
        BoolExpr::Not(x) => match simplify_bool_once(x) {
            BoolExpr::True => BoolExpr::falsity(),
            BoolExpr::Not(y) => *y,
            BoolExpr::Cmp(op, l, r) => BoolExpr::Cmp(op.negate(), l, r),
            BoolExpr::Or(a, c) => simplify_and(vec![BoolExpr::not(*a), BoolExpr::not(*c)]),
            BoolExpr::And(a, c) => simplify_or(vec![BoolExpr::not(*a), BoolExpr::not(*c)]),
        },
        BoolExpr::And(..) => simplify_and(b.conjuncts()),
        BoolExpr::Or(..) => simplify_or(b.disjuncts_raw()),
    }
}

impl BoolExpr {
    fn disjuncts_raw(&self) -> Vec<BoolExpr> {
        match self {
            BoolExpr::Or(a, b) => {
                let mut v = a.disjuncts_raw();
                v.extend(b.disjuncts_raw());
                v
            }
            other => vec![other.clone()],
        }
    }
}

/// Simplify a guard. Equivalent to the input on the naturals.
pub fn simplify_bool(b: &BoolExpr) -> BoolExpr {
    let mut cur = b.clone();
    for _ in 0..MAX_PASSES {
        let next = simplify_bool_once(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Cheap syntactic check that `hyp` implies `goal` on the naturals.
pub fn entails(hyp: &BoolExpr, goal: &BoolExpr) -> bool {
    simplify_bool(&BoolExpr::and(hyp.clone(), BoolExpr::not(goal.clone()))).is_false()
}

/// Cheap syntactic check that `b` is unsatisfiable on the naturals.
pub fn is_unsat(b: &BoolExpr) -> bool {
    simplify_bool(b).is_false()
}
