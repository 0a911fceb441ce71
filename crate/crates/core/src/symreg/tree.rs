use serde::Serialize;

use crate::linear::rational::exact_f64;
use crate::linear::rationalize_f64;
use crate::model::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOp {
    Add,
    Sub,
    Max,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnOp {
    Floor,
    Ceil,
    Square,
    Cube,
    Log2,
    Exp2,
    Fact,
}

impl BinOp {
    pub const ALL: [BinOp; 6] = [BinOp::Add, BinOp::Sub, BinOp::Max, BinOp::Mul, BinOp::Div, BinOp::Pow];

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Max => a.max(b),
            BinOp::Mul => a * b,
            BinOp::Div => {
                if b == 0.0 {
                    f64::NAN
                } else {
                    a / b
                }
            }
            BinOp::Pow => {
                if a == 0.0 && b < 0.0 {
                    f64::NAN
                } else {
                    a.powf(b)
                }
            }
        }
    }
}

impl UnOp {
    pub const ALL: [UnOp; 7] = [UnOp::Floor, UnOp::Ceil, UnOp::Square, UnOp::Cube, UnOp::Log2, UnOp::Exp2, UnOp::Fact];

    pub fn apply(self, a: f64) -> f64 {
        match self {
            UnOp::Floor => a.floor(),
            UnOp::Ceil => a.ceil(),
            UnOp::Square => a * a,
            UnOp::Cube => a * a * a,
            UnOp::Log2 => {
                if a > 0.0 {
                    a.log2()
                } else {
                    f64::NAN
                }
            }
            UnOp::Exp2 => a.exp2(),
            UnOp::Fact => {
                if a < 0.0 || a != a.floor() || a > 170.0 {
                    f64::NAN
                } else {
                    (1..=a as u64).map(|k| k as f64).product()
                }
            }
        }
    }
}

/// Expression tree over `f64` used during search.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Un(UnOp, Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
}

impl Node {
    /// Value at a point; `NaN` or an infinity marks an invalid evaluation.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Un(op, a) => op.apply(a.eval(x)),
            Node::Bin(op, a, b) => op.apply(a.eval(x), b.eval(x)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Un(_, a) => 1 + a.size(),
            Node::Bin(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Un(_, a) => 1 + a.depth(),
            Node::Bin(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Subtree at preorder index `i`.
    pub fn get(&self, i: usize) -> &Node {
        if i == 0 {
            return self;
        }
        match self {
            Node::Un(_, a) => a.get(i - 1),
            Node::Bin(_, a, b) => {
                let n = a.size();
                if i <= n {
                    a.get(i - 1)
                } else {
                    b.get(i - 1 - n)
                }
            }
            _ => panic!("subtree index out of range"),
        }
    }

    pub fn get_mut(&mut self, i: usize) -> &mut Node {
        if i == 0 {
            return self;
        }
        match self {
            Node::Un(_, a) => a.get_mut(i - 1),
            Node::Bin(_, a, b) => {
                let n = a.size();
                if i <= n {
                    a.get_mut(i - 1)
                } else {
                    b.get_mut(i - 1 - n)
                }
            }
            _ => panic!("subtree index out of range"),
        }
    }

    pub fn consts(&self) -> Vec<f64> {
        let mut out = vec![];
        self.visit(&mut |n| {
            if let Node::Const(c) = n {
                out.push(*c)
            }
        });
        out
    }

    pub fn set_consts(&mut self, vals: &[f64]) {
        let mut it = vals.iter();
        self.visit_mut(&mut |n| {
            if let Node::Const(c) = n {
                *c = *it.next().expect("constant count");
            }
        });
    }

    pub fn visit(&self, f: &mut dyn FnMut(&Node)) {
        f(self);
        match self {
            Node::Un(_, a) => a.visit(f),
            Node::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Node)) {
        f(self);
        match self {
            Node::Un(_, a) => a.visit_mut(f),
            Node::Bin(_, a, b) => {
                a.visit_mut(f);
                b.visit_mut(f);
            }
            _ => {}
        }
    }

    /// Fold operators whose arguments are all constants.
    pub fn fold_constants(self) -> Node {
        match self {
            Node::Un(op, a) => match a.fold_constants() {
                Node::Const(c) if op.apply(c).is_finite() => Node::Const(op.apply(c)),
                a => Node::Un(op, Box::new(a)),
            },
            Node::Bin(op, a, b) => match (a.fold_constants(), b.fold_constants()) {
                (Node::Const(x), Node::Const(y)) if op.apply(x, y).is_finite() => Node::Const(op.apply(x, y)),
                (a, b) => Node::Bin(op, Box::new(a), Box::new(b)),
            },
            n => n,
        }
    }

    /// Exact expression. Constants become small rationals when `round` is
    /// set and one is close enough; otherwise the double's exact value is
    /// used and the flag is cleared.
    pub fn to_expr(&self, params: &[String], round: bool, exact: &mut bool) -> Expr {
        match self {
            Node::Const(c) => {
                let r = if round { rationalize_f64(*c, 64, 1e-4) } else { None };
                match r {
                    Some(r) => Expr::Const(r),
                    None => {
                        if *c != c.round() || c.abs() > 1e15 {
                            *exact = false;
                        }
                        Expr::Const(exact_f64(*c))
                    }
                }
            }
            Node::Var(i) => Expr::var(&params[*i]),
            Node::Un(op, a) => {
                let a = a.to_expr(params, round, exact);
                match op {
                    UnOp::Floor => Expr::floor(a),
                    UnOp::Ceil => Expr::ceil(a),
                    UnOp::Square => Expr::pow(a, Expr::int(2)),
                    UnOp::Cube => Expr::pow(a, Expr::int(3)),
                    UnOp::Log2 => Expr::log2(a),
                    UnOp::Exp2 => Expr::pow(Expr::int(2), a),
                    UnOp::Fact => Expr::fact(a),
                }
            }
            Node::Bin(op, a, b) => {
                let a = a.to_expr(params, round, exact);
                let b = b.to_expr(params, round, exact);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Max => Expr::max(a, b),
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => Expr::pow(a, b),
                }
            }
        }
    }
}
