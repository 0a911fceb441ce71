mod common;

use proptest::prelude::*;
use recsolve::symreg::{evolve, mse, optimize_constants, BinOp, GpConfig, Node, OperatorSet, ParetoFront, UnOp};
use recsolve::value::{env_of, eval_ground};

fn var(i: usize) -> Node {
    Node::Var(i)
}
fn c(v: f64) -> Node {
    Node::Const(v)
}
fn bin(op: BinOp, a: Node, b: Node) -> Node {
    Node::Bin(op, Box::new(a), Box::new(b))
}
fn un(op: UnOp, a: Node) -> Node {
    Node::Un(op, Box::new(a))
}

/// Trees whose double evaluation is exact on small naturals: integer
/// constants, halving as the only division, and `2^` or `!` applied to
/// integers only.
fn tree() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![(-4i64..=4).prop_map(|v| c(v as f64)), (0usize..2).prop_map(var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| bin(BinOp::Max, a, b)),
            inner.clone().prop_map(|a| bin(BinOp::Div, a, c(2.0))),
            inner.clone().prop_map(|a| bin(BinOp::Pow, un(UnOp::Floor, a), c(2.0))),
            inner.clone().prop_map(|a| un(UnOp::Floor, a)),
            inner.clone().prop_map(|a| un(UnOp::Ceil, a)),
            inner.clone().prop_map(|a| un(UnOp::Square, a)),
            inner.clone().prop_map(|a| un(UnOp::Cube, a)),
            inner.clone().prop_map(|a| un(UnOp::Exp2, un(UnOp::Floor, a))),
            inner.prop_map(|a| un(UnOp::Fact, un(UnOp::Floor, a))),
        ]
    })
}

fn params() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

proptest! {
    #[test]
    fn translation_preserves_values(t in tree(), x in 0i64..=6, y in 0i64..=6) {
        let v = t.eval(&[x as f64, y as f64]);
        prop_assume!(v.is_finite() && v.abs() < 1e12);
        let mut exact = true;
        let e = t.to_expr(&params(), false, &mut exact);
        prop_assert!(exact);
        let got = eval_ground(&e, &env_of(&params(), &[x, y]));
        prop_assert!(got.is_ok(), "{:?} -> {:?}", e, got);
        let got = got.unwrap();
        prop_assert!(got.is_exact());
        prop_assert_eq!(got.to_f64(), v);
    }

    #[test]
    fn front_is_a_staircase(points in prop::collection::vec((1usize..30, 0.0f64..100.0), 1..60)) {
        let mut front = ParetoFront::default();
        for (i, (cx, loss)) in points.iter().enumerate() {
            front.insert(*cx, *loss, &c(i as f64));
        }
        let es = &front.entries;
        for w in es.windows(2) {
            prop_assert!(w[0].complexity < w[1].complexity);
            prop_assert!(w[0].loss > w[1].loss);
        }
        // Every inserted point is matched or beaten by an entry no more
        // complex, and every entry is one of the inserted points.
        for (cx, loss) in &points {
            prop_assert!(es.iter().any(|e| e.complexity <= *cx && e.loss <= *loss));
        }
        for e in es {
            let Node::Const(i) = e.tree else { unreachable!() };
            prop_assert_eq!(points[i as usize], (e.complexity, e.loss));
        }
    }

    #[test]
    fn complexity_counts_node_costs(t in tree()) {
        let ops = OperatorSet::default();
        prop_assert!(ops.complexity(&t) >= t.size());
        prop_assert!(ops.complexity(&t) <= 3 * t.size());
    }
}

#[test]
fn front_merge_keeps_dominating_entries() {
    let mut a = ParetoFront::default();
    a.insert(3, 1.0, &c(0.0));
    a.insert(7, 0.5, &c(1.0));
    let mut b = ParetoFront::default();
    b.insert(5, 0.2, &c(2.0));
    b.insert(9, 0.6, &c(3.0));
    a.merge(&b);
    let got: Vec<(usize, f64)> = a.entries.iter().map(|e| (e.complexity, e.loss)).collect();
    assert_eq!(got, vec![(3, 1.0), (5, 0.2)]);
    assert_eq!(a.best_loss(), 0.2);
}

#[test]
fn operator_costs() {
    let ops = OperatorSet::default();
    let t = bin(BinOp::Pow, var(0), un(UnOp::Floor, c(2.0)));
    assert_eq!(ops.complexity(&t), 3 + 1 + 2 + 1);
    let small = OperatorSet { binary: vec![BinOp::Add], unary: vec![] };
    assert!(!small.admits(&t));
    assert!(small.admits(&bin(BinOp::Add, var(0), c(1.0))));
}

#[test]
fn constant_fitting_recovers_affine_constants() {
    let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 3.5 * x[0] - 2.0).collect();
    let t = bin(BinOp::Add, bin(BinOp::Mul, c(1.0), var(0)), c(0.0));
    let fitted = optimize_constants(&t, &xs, &ys, 2000);
    assert!(mse(&fitted, &xs, &ys) < 1e-8, "{fitted:?}");
}

#[test]
fn invalid_rows_make_the_loss_infinite() {
    let xs = vec![vec![0.0], vec![1.0]];
    let t = un(UnOp::Log2, var(0));
    assert!(mse(&t, &xs, &[0.0, 0.0]).is_infinite());
}

#[test]
fn runs_are_reproducible() {
    let xs: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x[0] * x[0] + 1.0).collect();
    let cfg = GpConfig { populations: 4, iterations: 5, seed: 9, ..Default::default() };
    let run = || evolve(&xs, &ys, &OperatorSet::default(), &cfg, 0);
    let (a, b) = (run(), run());
    let key = |f: &ParetoFront| f.entries.iter().map(|e| (e.complexity, e.loss.to_bits(), format!("{:?}", e.tree))).collect::<Vec<_>>();
    assert_eq!(key(&a), key(&b));
}

#[test]
fn budget_stops_the_search() {
    let xs: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x[0].sin()).collect();
    let cfg = GpConfig { iterations: 10_000, budget: std::time::Duration::from_millis(200), ..Default::default() };
    let front = evolve(&xs, &ys, &OperatorSet::default(), &cfg, 0);
    assert!(front.budget_exhausted);
    assert!(!front.entries.is_empty());
}

#[test]
fn exponential_with_restricted_operators() {
    let hits = (0..5).filter(|&s| common::exp_run_is_exact(s)).count();
    assert!(hits >= 1, "no exact run out of 5");
}
