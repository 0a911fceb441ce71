//! Symbolic regression: island-model genetic programming over expression
//! trees, with a complexity-indexed front and simplex constant fitting.

pub mod nm;
pub mod tree;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

pub use tree::{BinOp, Node, UnOp};

use crate::guess::{guess_with, r_squared, Guess, PieceFit};
use crate::linear::predict;
use crate::model::{FuncDef, RecurrenceSystem};
use crate::rewrite::simplify;
use crate::sample::{rng_for, Dataset, SampleConfig};

#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub binary: Vec<BinOp>,
    pub unary: Vec<UnOp>,
}

impl Default for OperatorSet {
    fn default() -> Self {
        OperatorSet { binary: BinOp::ALL.to_vec(), unary: UnOp::ALL.to_vec() }
    }
}

impl OperatorSet {
    pub fn bin_cost(&self, op: BinOp) -> usize {
        if op == BinOp::Pow {
            3
        } else {
            1
        }
    }

    pub fn un_cost(&self, op: UnOp) -> usize {
        match op {
            UnOp::Floor | UnOp::Ceil => 2,
            _ => 1,
        }
    }

    /// Sum of node costs; leaves cost 1.
    pub fn complexity(&self, t: &Node) -> usize {
        match t {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Un(op, a) => self.un_cost(*op) + self.complexity(a),
            Node::Bin(op, a, b) => self.bin_cost(*op) + self.complexity(a) + self.complexity(b),
        }
    }

    /// Every operator in `t` belongs to this set.
    pub fn admits(&self, t: &Node) -> bool {
        let mut ok = true;
        t.visit(&mut |n| match n {
            Node::Un(op, _) if !self.unary.contains(op) => ok = false,
            Node::Bin(op, _, _) if !self.binary.contains(op) => ok = false,
            _ => {}
        });
        ok
    }
}

#[derive(Clone, Debug)]
pub struct GpConfig {
    pub populations: usize,
    pub population_size: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Wall clock per call of `evolve`.
    pub budget: Duration,
    pub max_complexity: usize,
    pub tournament: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    /// Offspring produced per island and iteration.
    pub events: usize,
    pub migrate_every: usize,
    /// Objective evaluations per constant optimization.
    pub nm_evals: usize,
    /// Chance that an offspring gets a short constant optimization.
    pub p_optimize: f64,
    /// Stop after this many iterations once some entry has zero loss.
    pub settle: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            populations: 45,
            population_size: 33,
            iterations: 40,
            seed: 0,
            budget: Duration::from_secs(180),
            max_complexity: 30,
            tournament: 3,
            p_crossover: 0.6,
            p_mutation: 0.3,
            events: 100,
            migrate_every: 5,
            nm_evals: 200,
            p_optimize: 0.1,
            settle: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrontEntry {
    pub complexity: usize,
    pub loss: f64,
    pub tree: Node,
}

/// Best expression per complexity, keeping only entries that beat every
/// simpler one.
#[derive(Clone, Debug, Default)]
pub struct ParetoFront {
    pub entries: Vec<FrontEntry>,
    /// The wall clock ran out before the last iteration.
    pub budget_exhausted: bool,
    pub iterations: usize,
}

impl ParetoFront {
    pub fn insert(&mut self, complexity: usize, loss: f64, tree: &Node) {
        if !loss.is_finite() {
            return;
        }
        if self.entries.iter().any(|e| e.complexity <= complexity && e.loss <= loss) {
            return;
        }
        self.entries.retain(|e| !(e.complexity >= complexity && e.loss >= loss));
        let at = self.entries.partition_point(|e| e.complexity < complexity);
        self.entries.insert(at, FrontEntry { complexity, loss, tree: tree.clone() });
    }

    pub fn merge(&mut self, other: &ParetoFront) {
        for e in &other.entries {
            self.insert(e.complexity, e.loss, &e.tree);
        }
    }

    pub fn best_loss(&self) -> f64 {
        self.entries.last().map(|e| e.loss).unwrap_or(f64::INFINITY)
    }
}

/// Mean squared error, infinite if any row is invalid.
pub fn mse(t: &Node, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let v = t.eval(x);
        if !v.is_finite() {
            return f64::INFINITY;
        }
        s += (v - y).powi(2);
    }
    let m = s / xs.len().max(1) as f64;
    if m.is_finite() {
        m
    } else {
        f64::INFINITY
    }
}

/// Tune the constant leaves of `t` by simplex search. Never returns a
/// tree with higher training error than `t`.
pub fn optimize_constants(t: &Node, xs: &[Vec<f64>], ys: &[f64], max_evals: usize) -> Node {
    let c0 = t.consts();
    if c0.is_empty() {
        return t.clone();
    }
    let base = mse(t, xs, ys);
    let mut work = t.clone();
    let (best, loss) = nelder_mead_on(&mut work, &c0, xs, ys, max_evals);
    if loss < base {
        work.set_consts(&best);
        work
    } else {
        t.clone()
    }
}

fn nelder_mead_on(work: &mut Node, c0: &[f64], xs: &[Vec<f64>], ys: &[f64], max_evals: usize) -> (Vec<f64>, f64) {
    let mut obj = |c: &[f64]| {
        work.set_consts(c);
        mse(work, xs, ys)
    };
    nm::nelder_mead(&mut obj, c0, max_evals)
}

#[derive(Clone, Debug)]
struct Member {
    tree: Node,
    loss: f64,
    complexity: usize,
}

struct Island<'a> {
    pop: Vec<Member>,
    rng: ChaCha8Rng,
    front: ParetoFront,
    ctx: &'a Ctx<'a>,
}

struct Ctx<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [f64],
    ops: &'a OperatorSet,
    cfg: &'a GpConfig,
    nvars: usize,
    const_scale: f64,
}

impl Ctx<'_> {
    fn member(&self, tree: Node) -> Member {
        let loss = mse(&tree, self.xs, self.ys);
        let complexity = self.ops.complexity(&tree);
        Member { tree, loss, complexity }
    }

    fn random_const(&self, rng: &mut ChaCha8Rng) -> f64 {
        if rng.gen_bool(0.5) {
            rng.gen_range(-2i32..=5) as f64
        } else {
            Normal::new(0.0, self.const_scale).unwrap().sample(rng)
        }
    }

    fn random_leaf(&self, rng: &mut ChaCha8Rng) -> Node {
        if self.nvars > 0 && rng.gen_bool(0.7) {
            Node::Var(rng.gen_range(0..self.nvars))
        } else {
            Node::Const(self.random_const(rng))
        }
    }

    fn random_tree(&self, rng: &mut ChaCha8Rng, depth: usize) -> Node {
        if depth == 0 || rng.gen_bool(0.3) {
            return self.random_leaf(rng);
        }
        let nb = self.ops.binary.len();
        let nu = self.ops.unary.len();
        if nb + nu == 0 {
            return self.random_leaf(rng);
        }
        let k = rng.gen_range(0..nb + nu);
        if k < nb {
            Node::Bin(
                self.ops.binary[k],
                Box::new(self.random_tree(rng, depth - 1)),
                Box::new(self.random_tree(rng, depth - 1)),
            )
        } else {
            Node::Un(self.ops.unary[k - nb], Box::new(self.random_tree(rng, depth - 1)))
        }
    }
}

fn better(a: &Member, b: &Member) -> bool {
    (a.loss, a.complexity) < (b.loss, b.complexity)
}

impl Island<'_> {
    fn tournament(&mut self) -> usize {
        let mut best = self.rng.gen_range(0..self.pop.len());
        for _ in 1..self.ctx.cfg.tournament {
            let j = self.rng.gen_range(0..self.pop.len());
            if better(&self.pop[j], &self.pop[best]) {
                best = j;
            }
        }
        best
    }

    fn victim(&mut self) -> usize {
        let mut worst = self.rng.gen_range(0..self.pop.len());
        for _ in 1..self.ctx.cfg.tournament {
            let j = self.rng.gen_range(0..self.pop.len());
            if better(&self.pop[worst], &self.pop[j]) {
                worst = j;
            }
        }
        worst
    }

    fn mutate(&mut self, t: &Node) -> Node {
        let ctx = self.ctx;
        let mut t = t.clone();
        let i = self.rng.gen_range(0..t.size());
        let rng = &mut self.rng;
        match rng.gen_range(0..5) {
            // Point mutation: same arity, different symbol.
            0 => {
                let n = t.get_mut(i);
                *n = match n.clone() {
                    Node::Const(_) | Node::Var(_) => ctx.random_leaf(rng),
                    Node::Un(_, a) => match ctx.ops.unary.choose(rng) {
                        Some(op) => Node::Un(*op, a),
                        None => *a,
                    },
                    Node::Bin(_, a, b) => Node::Bin(*ctx.ops.binary.choose(rng).unwrap(), a, b),
                };
            }
            // Fresh subtree.
            1 => *t.get_mut(i) = ctx.random_tree(rng, 3),
            // Wrap a subtree in a new operator.
            2 => {
                let n = t.get_mut(i);
                let old = n.clone();
                let nb = ctx.ops.binary.len();
                let nu = ctx.ops.unary.len();
                if nb + nu > 0 {
                    let k = rng.gen_range(0..nb + nu);
                    *n = if k < nb {
                        // Half the time the new operand starts neutral so the
                        // wrapped tree keeps its value until constants move.
                        let other = if rng.gen_bool(0.5) {
                            match ctx.ops.binary[k] {
                                BinOp::Mul | BinOp::Div | BinOp::Pow => Node::Const(1.0),
                                _ => Node::Const(0.0),
                            }
                        } else {
                            ctx.random_leaf(rng)
                        };
                        if rng.gen_bool(0.5) {
                            Node::Bin(ctx.ops.binary[k], Box::new(old), Box::new(other))
                        } else {
                            Node::Bin(ctx.ops.binary[k], Box::new(other), Box::new(old))
                        }
                    } else {
                        Node::Un(ctx.ops.unary[k - nb], Box::new(old))
                    };
                }
            }
            // Replace an operator by one of its arguments.
            3 => {
                let n = t.get_mut(i);
                *n = match n.clone() {
                    Node::Un(_, a) => *a,
                    Node::Bin(_, a, b) => {
                        if rng.gen_bool(0.5) {
                            *a
                        } else {
                            *b
                        }
                    }
                    leaf => leaf,
                };
            }
            _ => return self.perturb(&t),
        }
        t
    }

    fn perturb(&mut self, t: &Node) -> Node {
        let mut t = t.clone();
        let cs = t.consts();
        if cs.is_empty() {
            return t;
        }
        let k = self.rng.gen_range(0..cs.len());
        let mut cs2 = cs.clone();
        let f: f64 = Normal::new(0.0, 0.5).unwrap().sample(&mut self.rng);
        cs2[k] = if self.rng.gen_bool(0.5) { cs[k] * (1.0 + f) } else { cs[k] + f };
        t.set_consts(&cs2);
        t
    }

    fn crossover(&mut self, a: &Node, b: &Node) -> Node {
        let mut child = a.clone();
        let i = self.rng.gen_range(0..a.size());
        let j = self.rng.gen_range(0..b.size());
        *child.get_mut(i) = b.get(j).clone();
        child
    }

    fn step(&mut self) {
        let cfg = self.ctx.cfg;
        for _ in 0..cfg.events {
            let r: f64 = self.rng.gen();
            let p = self.tournament();
            let parent = self.pop[p].tree.clone();
            let child = if r < cfg.p_crossover {
                let q = self.tournament();
                let other = self.pop[q].tree.clone();
                self.crossover(&parent, &other)
            } else if r < cfg.p_crossover + cfg.p_mutation {
                self.mutate(&parent)
            } else {
                self.perturb(&parent)
            };
            let child = child.fold_constants();
            if self.ctx.ops.complexity(&child) > cfg.max_complexity {
                continue;
            }
            let child = if self.rng.gen_bool(cfg.p_optimize) {
                optimize_constants(&child, self.ctx.xs, self.ctx.ys, cfg.nm_evals / 4)
            } else {
                child
            };
            let m = self.ctx.member(child);
            self.front.insert(m.complexity, m.loss, &m.tree);
            let v = self.victim();
            self.pop[v] = m;
        }
        // Constant fitting for the island's best and one random member.
        let best = (0..self.pop.len()).min_by(|&a, &b| {
            let (x, y) = (&self.pop[a], &self.pop[b]);
            (x.loss, x.complexity).partial_cmp(&(y.loss, y.complexity)).unwrap()
        });
        let pick = self.rng.gen_range(0..self.pop.len());
        for i in best.into_iter().chain([pick]) {
            let t = optimize_constants(&self.pop[i].tree, self.ctx.xs, self.ctx.ys, cfg.nm_evals);
            let m = self.ctx.member(t);
            self.front.insert(m.complexity, m.loss, &m.tree);
            self.pop[i] = m;
        }
    }
}

/// Run the island model on `(xs, ys)` and return the merged front.
pub fn evolve(xs: &[Vec<f64>], ys: &[f64], ops: &OperatorSet, cfg: &GpConfig, stream: u64) -> ParetoFront {
    let start = Instant::now();
    let nvars = xs.first().map(|r| r.len()).unwrap_or(0);
    let spread = ys.iter().map(|y| y.abs()).fold(0.0, f64::max);
    let ctx = Ctx { xs, ys, ops, cfg, nvars, const_scale: spread.clamp(1.0, 10.0) };
    let scale: f64 = ys.iter().map(|y| y * y).sum::<f64>() / ys.len().max(1) as f64;
    let zero_loss = 1e-20 * scale.max(1.0);
    let mut islands: Vec<Island> = (0..cfg.populations.max(1))
        .map(|k| {
            let mut rng = rng_for(cfg.seed, 1000 * stream + k as u64);
            let pop = (0..cfg.population_size.max(2))
                .map(|_| {
                    let d = rng.gen_range(1..=3);
                    ctx.member(ctx.random_tree(&mut rng, d))
                })
                .filter(|m| m.complexity <= cfg.max_complexity)
                .collect::<Vec<_>>();
            Island { pop, rng, front: ParetoFront::default(), ctx: &ctx }
        })
        .collect();
    for isl in &mut islands {
        while isl.pop.len() < cfg.population_size.max(2) {
            let leaf = ctx.random_leaf(&mut isl.rng);
            isl.pop.push(ctx.member(leaf));
        }
        for m in isl.pop.clone() {
            isl.front.insert(m.complexity, m.loss, &m.tree);
        }
    }
    let mut front = ParetoFront::default();
    let mut solved_at: Option<usize> = None;
    for it in 0..cfg.iterations {
        if start.elapsed() > cfg.budget {
            front.budget_exhausted = true;
            break;
        }
        islands.par_iter_mut().for_each(|isl| isl.step());
        front.iterations = it + 1;
        if cfg.migrate_every > 0 && (it + 1) % cfg.migrate_every == 0 && islands.len() > 1 {
            let bests: Vec<Member> = islands
                .iter()
                .map(|isl| isl.pop.iter().min_by(|a, b| a.loss.total_cmp(&b.loss)).unwrap().clone())
                .collect();
            let n = islands.len();
            for (k, isl) in islands.iter_mut().enumerate() {
                let v = isl.victim();
                isl.pop[v] = bests[(k + n - 1) % n].clone();
            }
        }
        for isl in &islands {
            front.merge(&isl.front);
        }
        if front.best_loss() <= zero_loss {
            let s = *solved_at.get_or_insert(it);
            if it >= s + cfg.settle {
                break;
            }
        }
    }
    for isl in &islands {
        front.merge(&isl.front);
    }
    front
}

/// Choose from the front the entry with the best R² on the scoring rows
/// (complexity breaks near-ties), as an exact expression.
fn select(front: &ParetoFront, ds: &Dataset) -> Option<PieceFit> {
    let (sx, sy) = ds.score_rows();
    let mut scored: Vec<(usize, f64, PieceFit)> = vec![];
    for e in &front.entries {
        let mut options = vec![];
        for round in [true, false] {
            let mut exact = true;
            let body = e.tree.to_expr(&ds.params, round, &mut exact);
            let r2 = r_squared(&predict(&body, &ds.params, sx), sy);
            options.push((r2, body, exact));
        }
        // Prefer rounded constants unless rounding hurts the fit.
        let (r2, body, exact) = if options[1].0 > options[0].0 + 1e-9 { options.remove(1) } else { options.remove(0) };
        let simple = simplify(&body);
        let sr2 = r_squared(&predict(&simple, &ds.params, sx), sy);
        let (body, r2) = if sr2 >= r2 - 1e-12 { (simple, sr2) } else { (body, r2) };
        scored.push((e.complexity, r2, PieceFit { body, score: r2.clamp(0.0, 1.0), exact, note: String::new() }));
    }
    let best = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() && scored.iter().all(|s| s.1.is_infinite()) {
        return scored.into_iter().next().map(|s| s.2);
    }
    scored.into_iter().find(|s| s.1 >= best - 1e-9).map(|s| s.2)
}

/// Constant model for datasets too small to search on.
fn mean_fit(ds: &Dataset) -> PieceFit {
    let mean = ds.train_y.iter().sum::<f64>() / ds.train_y.len().max(1) as f64;
    let mut exact = true;
    let body = Node::Const(mean).to_expr(&ds.params, true, &mut exact);
    let (sx, sy) = ds.score_rows();
    let r2 = r_squared(&predict(&body, &ds.params, sx), sy);
    PieceFit { body, score: r2.clamp(0.0, 1.0), exact, note: "constant model".into() }
}

/// Fit one dataset by symbolic regression.
pub fn fit_dataset(ds: &Dataset, ops: &OperatorSet, cfg: &GpConfig, stream: u64) -> Result<PieceFit, String> {
    if ds.train_x.len() < 5 {
        return Ok(mean_fit(ds));
    }
    let xs: Vec<Vec<f64>> = ds.train_x.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let front = evolve(&xs, &ds.train_y, ops, cfg, stream);
    let mut fit = select(&front, ds).ok_or_else(|| "empty front".to_string())?;
    fit.note = format!(
        "front={} iterations={}{}",
        front.entries.len(),
        front.iterations,
        if front.budget_exhausted { " budget-exhausted" } else { "" }
    );
    Ok(fit)
}

/// Symbolic-regression guess for `f`, per subdomain when `domsplit` is set.
pub fn guess_symbolic(
    sys: &RecurrenceSystem,
    f: &FuncDef,
    scfg: &SampleConfig,
    ops: &OperatorSet,
    cfg: &GpConfig,
    domsplit: bool,
) -> Guess {
    guess_with(sys, f, scfg, domsplit, |ds, stream| fit_dataset(ds, ops, cfg, stream))
}
