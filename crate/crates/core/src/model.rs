//! Expressions, guards, recurrence systems and piecewise candidates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arithmetic expression over integer-valued variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(BigRational),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Floor(Box<Expr>),
    Ceil(Box<Expr>),
    Log2(Box<Expr>),
    Factorial(Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator obtained by swapping the operands.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            op => op,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Guard formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoolExpr {
    True,
    Cmp(CmpOp, Expr, Expr),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub guard: BoolExpr,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncDef {
    pub name: String,
    pub params: Vec<String>,
    pub pre: BoolExpr,
    pub cases: Vec<Case>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceSystem {
    pub funcs: Vec<FuncDef>,
    pub entry: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub subdomain: BoolExpr,
    pub body: Expr,
    /// Test-set R² of this piece, clamped to [0, 1].
    pub score: f64,
    /// False when some coefficient could not be rationalized and was kept as a
    /// binary fraction; such pieces are never sent to the verifier.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseClosedForm {
    pub params: Vec<String>,
    pub pieces: Vec<Piece>,
    pub score: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{0}` defined twice")]
    DuplicateFunction(String),
    #[error("function `{func}` has duplicate parameter `{param}`")]
    DuplicateParam { func: String, param: String },
    #[error("`{func}` called with {got} arguments, expected {expected}")]
    Arity { func: String, expected: usize, got: usize },
    #[error("guard or precondition of `{0}` contains a call")]
    CallInGuard(String),
    #[error("variable `{var}` is not a parameter of `{func}`")]
    FreeVariable { func: String, var: String },
    #[error("function `{0}` has no cases")]
    NoCases(String),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn rat(n: i64, d: i64) -> Expr {
        Expr::Const(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Call(name.to_string(), args)
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        Expr::Pow(Box::new(a), Box::new(b))
    }

    pub fn floor(a: Expr) -> Expr {
        Expr::Floor(Box::new(a))
    }

    pub fn ceil(a: Expr) -> Expr {
        Expr::Ceil(Box::new(a))
    }

    pub fn log2(a: Expr) -> Expr {
        Expr::Log2(Box::new(a))
    }

    pub fn fact(a: Expr) -> Expr {
        Expr::Factorial(Box::new(a))
    }

    pub fn max(a: Expr, b: Expr) -> Expr {
        Expr::Max(Box::new(a), Box::new(b))
    }

    pub fn min(a: Expr, b: Expr) -> Expr {
        Expr::Min(Box::new(a), Box::new(b))
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::Var(_) => vec![],
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b)
            | Expr::Max(a, b)
            | Expr::Min(a, b) => vec![a, b],
            Expr::Floor(a) | Expr::Ceil(a) | Expr::Log2(a) | Expr::Factorial(a) => vec![a],
            Expr::Call(_, args) => args.iter().collect(),
        }
    }

    /// Rebuild this node with new children (same arity as `children`).
    pub fn with_children(&self, mut kids: Vec<Expr>) -> Expr {
        let mut next = || Box::new(kids.remove(0));
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Add(..) => Expr::Add(next(), next()),
            Expr::Sub(..) => Expr::Sub(next(), next()),
            Expr::Mul(..) => Expr::Mul(next(), next()),
            Expr::Div(..) => Expr::Div(next(), next()),
            Expr::Pow(..) => Expr::Pow(next(), next()),
            Expr::Max(..) => Expr::Max(next(), next()),
            Expr::Min(..) => Expr::Min(next(), next()),
            Expr::Floor(_) => Expr::Floor(next()),
            Expr::Ceil(_) => Expr::Ceil(next()),
            Expr::Log2(_) => Expr::Log2(next()),
            Expr::Factorial(_) => Expr::Factorial(next()),
            Expr::Call(f, _) => Expr::Call(f.clone(), kids),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn contains_calls(&self) -> bool {
        matches!(self, Expr::Call(..)) || self.children().iter().any(|c| c.contains_calls())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Expr::Var(v) = self {
            out.insert(v.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Names of all called functions with their argument counts.
    pub fn called(&self, out: &mut Vec<(String, usize)>) {
        if let Expr::Call(f, args) = self {
            out.push((f.clone(), args.len()));
        }
        for c in self.children() {
            c.called(out);
        }
    }

    /// Simultaneous substitution of variables.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Const(_) => self.clone(),
            _ => self.with_children(self.children().into_iter().map(|c| c.substitute(map)).collect()),
        }
    }

    /// Bottom-up rewrite of every node.
    pub fn map_bottom_up(&self, f: &mut dyn FnMut(Expr) -> Expr) -> Expr {
        let kids: Vec<Expr> = self.children().into_iter().map(|c| c.map_bottom_up(f)).collect();
        f(self.with_children(kids))
    }
}

macro_rules! expr_binop {
    ($tr:ident, $m:ident, $variant:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}
expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl BoolExpr {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> BoolExpr {
        BoolExpr::Cmp(op, a, b)
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn not(a: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(a))
    }

    pub fn falsity() -> BoolExpr {
        BoolExpr::not(BoolExpr::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, BoolExpr::Not(b) if **b == BoolExpr::True)
    }

    /// Conjunction of a list, `True` when empty.
    pub fn all(items: impl IntoIterator<Item = BoolExpr>) -> BoolExpr {
        items
            .into_iter()
            .reduce(BoolExpr::and)
            .unwrap_or(BoolExpr::True)
    }

    pub fn any(items: impl IntoIterator<Item = BoolExpr>) -> BoolExpr {
        items
            .into_iter()
            .reduce(BoolExpr::or)
            .unwrap_or_else(BoolExpr::falsity)
    }

    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> BoolExpr {
        match self {
            BoolExpr::True => BoolExpr::True,
            BoolExpr::Cmp(op, a, b) => BoolExpr::Cmp(*op, a.substitute(map), b.substitute(map)),
            BoolExpr::And(a, b) => BoolExpr::and(a.substitute(map), b.substitute(map)),
            BoolExpr::Or(a, b) => BoolExpr::or(a.substitute(map), b.substitute(map)),
            BoolExpr::Not(a) => BoolExpr::not(a.substitute(map)),
        }
    }

    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            BoolExpr::True => vec![],
            BoolExpr::Cmp(_, a, b) => vec![a, b],
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                let mut v = a.exprs();
                v.extend(b.exprs());
                v
            }
            BoolExpr::Not(a) => a.exprs(),
        }
    }

    pub fn contains_calls(&self) -> bool {
        self.exprs().iter().any(|e| e.contains_calls())
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.exprs().iter().flat_map(|e| e.free_vars()).collect()
    }

    /// Flattened top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<BoolExpr> {
        match self {
            BoolExpr::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            BoolExpr::True => vec![],
            other => vec![other.clone()],
        }
    }

    pub fn disjuncts(&self) -> Vec<BoolExpr> {
        match self {
            BoolExpr::Or(a, b) => {
                let mut v = a.disjuncts();
                v.extend(b.disjuncts());
                v
            }
            other if other.is_false() => vec![],
            other => vec![other.clone()],
        }
    }
}

impl FuncDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

impl RecurrenceSystem {
    pub fn func(&self, name: &str) -> Option<&FuncDef> {
        self.funcs.iter().find(|f| f.name == name)
    }

    pub fn entry_func(&self) -> &FuncDef {
        self.func(&self.entry).expect("validated system has its entry function")
    }

    /// Check the structural invariants of a system.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        for f in &self.funcs {
            if !seen.insert(f.name.clone()) {
                return Err(ModelError::DuplicateFunction(f.name.clone()));
            }
        }
        if self.func(&self.entry).is_none() {
            return Err(ModelError::UnknownFunction(self.entry.clone()));
        }
        for f in &self.funcs {
            let mut ps = BTreeSet::new();
            for p in &f.params {
                if !ps.insert(p.clone()) {
                    return Err(ModelError::DuplicateParam { func: f.name.clone(), param: p.clone() });
                }
            }
            if f.cases.is_empty() {
                return Err(ModelError::NoCases(f.name.clone()));
            }
            if f.pre.contains_calls() {
                return Err(ModelError::CallInGuard(f.name.clone()));
            }
            let mut vars = f.pre.free_vars();
            for c in &f.cases {
                if c.guard.contains_calls() {
                    return Err(ModelError::CallInGuard(f.name.clone()));
                }
                vars.extend(c.guard.free_vars());
                vars.extend(c.body.free_vars());
                let mut calls = vec![];
                c.body.called(&mut calls);
                for (g, n) in calls {
                    let callee = self.func(&g).ok_or_else(|| ModelError::UnknownFunction(g.clone()))?;
                    if callee.arity() != n {
                        return Err(ModelError::Arity { func: g, expected: callee.arity(), got: n });
                    }
                }
            }
            if let Some(v) = vars.iter().find(|v| !ps.contains(*v)) {
                return Err(ModelError::FreeVariable { func: f.name.clone(), var: v.clone() });
            }
        }
        Ok(())
    }
}

impl PiecewiseClosedForm {
    /// A candidate with a single piece valid everywhere.
    pub fn global(params: Vec<String>, body: Expr) -> Self {
        PiecewiseClosedForm {
            params,
            pieces: vec![Piece { subdomain: BoolExpr::True, body, score: 1.0, exact: true }],
            score: 1.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.pieces.iter().all(|p| p.exact)
    }

    pub fn env_for(&self, point: &[BigInt]) -> crate::value::Env {
        self.params.iter().cloned().zip(point.iter().cloned()).collect()
    }

    /// Evaluate at a point, using the first piece whose subdomain holds.
    pub fn eval(&self, point: &[BigInt]) -> Result<crate::value::Num, crate::value::EvalError> {
        let env = self.env_for(point);
        for p in &self.pieces {
            if crate::value::eval_bool(&p.subdomain, &env)? {
                return crate::value::eval_ground(&p.body, &env);
            }
        }
        Err(crate::value::EvalError::NoPiece)
    }
}

pub fn rational_to_string(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn is_nonneg_integer(c: &BigRational) -> bool {
    c.is_integer() && !c.is_negative()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_expr(self))
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_bool(self))
    }
}

impl fmt::Display for PiecewiseClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_candidate(self))
    }
}
