//! Checking candidates: substitute the candidate for recursive calls,
//! simplify, and ask an SMT solver for a point where the equation fails.

pub mod encode;
pub mod sexp;
pub mod solver;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

pub use encode::{var_symbol, Encoder};
pub use solver::{Answer, SmtError, SolverConfig, SOLVER_ENV};

use crate::eval::{eval_fun, Budget};
use crate::model::{BoolExpr, Expr, FuncDef, PiecewiseClosedForm, RecurrenceSystem};
use crate::rewrite::{contains_unsupported, entails, is_unsat, simplify, simplify_bool};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verification {
    Proved,
    Disproved {
        #[serde(serialize_with = "ser_point")]
        counterexample: BTreeMap<String, BigInt>,
        /// The evaluator disagrees with the candidate at the point.
        confirmed: bool,
    },
    Unknown {
        reason: String,
    },
    Unsupported {
        constructs: Vec<String>,
    },
}

fn ser_point<S: serde::Serializer>(p: &BTreeMap<String, BigInt>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(p.iter().map(|(k, v)| (k, v.to_string())))
}

impl Verification {
    pub fn name(&self) -> &'static str {
        match self {
            Verification::Proved => "proved",
            Verification::Disproved { .. } => "disproved",
            Verification::Unknown { .. } => "unknown",
            Verification::Unsupported { .. } => "unsupported",
        }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, Verification::Proved)
    }
}

/// Exponent range of the quantifier-free power tables.
pub const POW_TABLE: u32 = 64;

/// Most alternatives one equation may split into.
pub const MAX_ALTERNATIVES: usize = 4096;

/// Any call to `f` remains in `e`.
pub fn contains_calls(e: &Expr, f: &str) -> bool {
    let mut calls = vec![];
    e.called(&mut calls);
    calls.iter().any(|(g, _)| g == f)
}

/// An expression valid under extra conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct Alternative {
    pub conds: Vec<BoolExpr>,
    pub expr: Expr,
}

fn bind(params: &[String], args: &[Expr]) -> BTreeMap<String, Expr> {
    params.iter().cloned().zip(args.iter().cloned()).collect()
}

/// The candidate applied to `args`: one alternative per piece, guarded by
/// its subdomain and the failure of all earlier ones.
pub fn candidate_at(cand: &PiecewiseClosedForm, args: &[Expr]) -> Vec<Alternative> {
    let map = bind(&cand.params, args);
    let mut earlier = vec![];
    let mut out = vec![];
    for p in &cand.pieces {
        let here = p.subdomain.substitute(&map);
        let mut conds: Vec<BoolExpr> = earlier.iter().map(|c: &BoolExpr| BoolExpr::not(c.clone())).collect();
        conds.push(here.clone());
        let c = simplify_bool(&BoolExpr::all(conds));
        if !c.is_false() {
            out.push(Alternative { conds: vec![c], expr: p.body.substitute(&map) });
        }
        earlier.push(here);
    }
    out
}

/// Points no piece covers, for arguments `args`.
fn uncovered(cand: &PiecewiseClosedForm, args: &[Expr]) -> BoolExpr {
    let map = bind(&cand.params, args);
    simplify_bool(&BoolExpr::all(cand.pieces.iter().map(|p| BoolExpr::not(p.subdomain.substitute(&map)))))
}

/// Substitutes the candidate for calls to one function, innermost first.
pub struct Replacer<'a> {
    pub func: &'a FuncDef,
    pub cand: &'a PiecewiseClosedForm,
    /// Holds wherever the expression is evaluated.
    pub context: BoolExpr,
    pub solver: Option<&'a SolverConfig>,
    /// Calls left in place because their arguments may leave the
    /// precondition.
    pub blocked: Vec<String>,
    pub solver_calls: usize,
}

impl<'a> Replacer<'a> {
    pub fn new(func: &'a FuncDef, cand: &'a PiecewiseClosedForm, context: BoolExpr, solver: Option<&'a SolverConfig>) -> Self {
        Replacer { func, cand, context, solver, blocked: vec![], solver_calls: 0 }
    }

    /// `context ∧ conds` implies the precondition at `args`.
    fn args_in_domain(&mut self, conds: &[BoolExpr], args: &[Expr]) -> bool {
        let goal = self.func.pre.substitute(&bind(&self.func.params, args));
        let mut hyp = vec![self.context.clone()];
        hyp.extend(conds.iter().cloned());
        let hyp = BoolExpr::all(hyp);
        if entails(&hyp, &goal) {
            return true;
        }
        let Some(cfg) = self.solver else { return false };
        self.solver_calls += 1;
        valid(&hyp, &goal, &self.func.params, cfg)
    }

    pub fn replace(&mut self, e: &Expr) -> Result<Vec<Alternative>, String> {
        self.replace_in(e, &[])
    }

    fn replace_in(&mut self, e: &Expr, outer: &[BoolExpr]) -> Result<Vec<Alternative>, String> {
        let kids: Vec<Expr> = e.children().into_iter().cloned().collect();
        let mut combos = vec![Alternative { conds: vec![], expr: Expr::int(0) }];
        let mut built: Vec<Vec<Expr>> = vec![vec![]];
        for k in &kids {
            let mut next_c = vec![];
            let mut next_b = vec![];
            for (c, b) in combos.iter().zip(&built) {
                let mut ctx = outer.to_vec();
                ctx.extend(c.conds.iter().cloned());
                for alt in self.replace_in(k, &ctx)? {
                    let mut conds = c.conds.clone();
                    conds.extend(alt.conds);
                    let mut bs = b.clone();
                    bs.push(alt.expr);
                    next_c.push(Alternative { conds, expr: Expr::int(0) });
                    next_b.push(bs);
                }
            }
            if next_c.len() > MAX_ALTERNATIVES {
                return Err(format!("more than {MAX_ALTERNATIVES} case combinations"));
            }
            combos = next_c;
            built = next_b;
        }
        let mut out = vec![];
        for (c, b) in combos.into_iter().zip(built) {
            match e {
                Expr::Call(g, _) if *g == self.func.name => {
                    let args: Vec<Expr> = b.into_iter().map(|a| simplify(&Expr::floor(a))).collect();
                    let mut ctx = outer.to_vec();
                    ctx.extend(c.conds.iter().cloned());
                    if !self.args_in_domain(&ctx, &args) {
                        self.blocked.push(Expr::Call(g.clone(), args.clone()).to_string());
                        out.push(Alternative { conds: c.conds, expr: Expr::Call(g.clone(), args) });
                        continue;
                    }
                    for alt in candidate_at(self.cand, &args) {
                        let mut conds = c.conds.clone();
                        conds.extend(alt.conds);
                        let mut all = vec![self.context.clone()];
                        all.extend(outer.iter().cloned());
                        all.extend(conds.iter().cloned());
                        if is_unsat(&BoolExpr::all(all)) {
                            continue;
                        }
                        out.push(Alternative { conds, expr: alt.expr });
                    }
                }
                _ => out.push(Alternative { conds: c.conds, expr: e.with_children(b) }),
            }
            if out.len() > MAX_ALTERNATIVES {
                return Err(format!("more than {MAX_ALTERNATIVES} case combinations"));
            }
        }
        Ok(out)
    }
}

/// One implication `hyp ⟹ lhs = rhs` left after simplification. With
/// `lhs = None`, every point of `hyp` is a violation.
#[derive(Clone, Debug)]
pub struct Obligation {
    pub case: usize,
    pub hyp: BoolExpr,
    pub lhs: Option<Expr>,
    pub rhs: Expr,
}

/// A query ready for the solver.
#[derive(Clone, Debug)]
pub struct SmtJob {
    /// Declarations and the negated formula, without `check-sat`.
    pub body: String,
    /// Quantifier-free variant with tabulated powers, when powers occur.
    pub bounded: Option<String>,
    /// Parameter name to SMT symbol.
    pub vars: Vec<(String, String)>,
    pub obligations: Vec<Obligation>,
    /// Obligations closed by the rewriter alone.
    pub discharged: usize,
    /// Solver queries spent on call-argument entailment.
    pub side_queries: usize,
}

impl SmtJob {
    pub fn text(&self, extra: &[String]) -> String {
        Self::finish(&self.body, extra)
    }

    pub fn bounded_text(&self, extra: &[String]) -> Option<String> {
        self.bounded.as_ref().map(|b| Self::finish(b, extra))
    }

    fn finish(body: &str, extra: &[String]) -> String {
        let mut s = body.to_string();
        for e in extra {
            s.push_str(&format!("(assert {e})\n"));
        }
        s.push_str("(check-sat)\n(get-model)\n");
        s
    }
}

/// `hyp ⟹ goal` over the naturals, by asking for a counter-model.
pub fn valid(hyp: &BoolExpr, goal: &BoolExpr, params: &[String], cfg: &SolverConfig) -> bool {
    let mut enc = Encoder::new(params);
    let h = enc.boolean(hyp);
    let g = enc.boolean(goal);
    if !enc.unsupported.is_empty() {
        return false;
    }
    let q = format!("{}(assert {h})\n(assert (not {g}))\n(check-sat)\n", enc.preamble(None));
    matches!(solver::run(&q, cfg, "entailment"), Ok(Answer::Unsat))
}

/// Build the negated equation for a single-function system.
pub fn encode(
    sys: &RecurrenceSystem,
    cand: &PiecewiseClosedForm,
    cfg: Option<&SolverConfig>,
) -> Result<SmtJob, Verification> {
    if sys.funcs.len() > 1 {
        return Err(Verification::Unsupported { constructs: vec!["systems of equations".into()] });
    }
    if !cand.is_exact() {
        return Err(Verification::Unsupported { constructs: vec!["inexact constant".into()] });
    }
    let f = sys.entry_func();
    let params: Vec<Expr> = f.params.iter().map(|p| Expr::var(p)).collect();
    let mut cand = cand.clone();
    cand.params = f.params.clone();
    let mut obligations = vec![];
    let mut discharged = 0;
    let mut side_queries = 0;
    let mut unsupported: Vec<String> = vec![];
    let mut earlier: Vec<BoolExpr> = vec![];
    for (i, case) in f.cases.iter().enumerate() {
        let mut parts = vec![f.pre.clone(), case.guard.clone()];
        parts.extend(earlier.iter().map(|g| BoolExpr::not(g.clone())));
        earlier.push(case.guard.clone());
        let hyp = simplify_bool(&BoolExpr::all(parts));
        if hyp.is_false() {
            continue;
        }
        let gap = simplify_bool(&BoolExpr::and(hyp.clone(), uncovered(&cand, &params)));
        if !gap.is_false() {
            obligations.push(Obligation { case: i, hyp: gap, lhs: None, rhs: Expr::int(0) });
        }
        let mut rep = Replacer::new(f, &cand, hyp.clone(), cfg);
        let rhs = rep.replace(&case.body).map_err(|r| Verification::Unknown { reason: r })?;
        side_queries += rep.solver_calls;
        if !rep.blocked.is_empty() {
            let mut c: Vec<String> = rep.blocked.iter().map(|b| format!("call {b} may leave the precondition")).collect();
            c.dedup();
            return Err(Verification::Unsupported { constructs: c });
        }
        for l in candidate_at(&cand, &params) {
            for r in &rhs {
                let mut all = vec![hyp.clone()];
                all.extend(l.conds.iter().cloned());
                all.extend(r.conds.iter().cloned());
                let h = simplify_bool(&BoolExpr::all(all));
                if h.is_false() {
                    continue;
                }
                let diff = simplify(&(l.expr.clone() - r.expr.clone()));
                if diff.is_zero() {
                    discharged += 1;
                    continue;
                }
                let (ls, rs) = (simplify(&l.expr), simplify(&r.expr));
                for e in [&ls, &rs] {
                    for u in contains_unsupported(e) {
                        if !unsupported.contains(&u) {
                            unsupported.push(u);
                        }
                    }
                }
                obligations.push(Obligation { case: i, hyp: h, lhs: Some(ls), rhs: rs });
            }
        }
    }
    if !unsupported.is_empty() {
        return Err(Verification::Unsupported { constructs: unsupported });
    }
    let mut enc = Encoder::new(&f.params);
    let disjuncts: Vec<String> = obligations
        .iter()
        .map(|o| {
            let h = enc.boolean(&o.hyp);
            match &o.lhs {
                None => h,
                Some(l) => {
                    let (l, r) = (enc.real(l), enc.real(&o.rhs));
                    format!("(and {h} (not (= {l} {r})))")
                }
            }
        })
        .collect();
    if !enc.unsupported.is_empty() {
        return Err(Verification::Unsupported { constructs: enc.unsupported.into_iter().collect() });
    }
    let negated = match disjuncts.len() {
        0 => "false".to_string(),
        1 => disjuncts[0].clone(),
        _ => format!("(or\n  {})", disjuncts.join("\n  ")),
    };
    let body = format!("{}(assert {negated})\n", enc.preamble(None));
    let bounded = enc.has_powers().then(|| format!("{}(assert {negated})\n", enc.preamble(Some(POW_TABLE))));
    let vars = enc.vars.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    Ok(SmtJob { body, bounded, vars, obligations, discharged, side_queries })
}

/// Outcome and bookkeeping of one verification.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub result: Verification,
    pub obligations: usize,
    pub discharged: usize,
    pub solver_calls: usize,
    #[serde(skip)]
    pub query: Option<String>,
}

fn point_of(model: &BTreeMap<String, BigInt>, vars: &[(String, String)], params: &[String]) -> BTreeMap<String, BigInt> {
    let by_sym: BTreeMap<&str, &str> = vars.iter().map(|(p, s)| (s.as_str(), p.as_str())).collect();
    let mut out: BTreeMap<String, BigInt> = params.iter().map(|p| (p.clone(), BigInt::from(0))).collect();
    for (s, v) in model {
        if let Some(p) = by_sym.get(s.as_str()) {
            out.insert(p.to_string(), v.clone());
        }
    }
    out
}

/// The recurrence and the candidate evaluate to different values at `point`.
pub fn confirm(sys: &RecurrenceSystem, cand: &PiecewiseClosedForm, point: &BTreeMap<String, BigInt>) -> bool {
    let f = sys.entry_func();
    let args: Vec<BigInt> = f.params.iter().map(|p| point.get(p).cloned().unwrap_or_default()).collect();
    let Ok(truth) = eval_fun(sys, &f.name, &args, Budget::default()) else { return false };
    let mut c = cand.clone();
    c.params = f.params.clone();
    match c.eval(&args) {
        Ok(v) => {
            if truth.is_exact() && v.is_exact() {
                truth != v
            } else {
                !truth.approx_eq(&v, 1e-9)
            }
        }
        Err(_) => true,
    }
}

/// Check whether `cand` solves the entry equation of `sys`.
pub fn verify(sys: &RecurrenceSystem, cand: &PiecewiseClosedForm, cfg: &SolverConfig) -> VerifyReport {
    let job = match encode(sys, cand, Some(cfg)) {
        Ok(j) => j,
        Err(v) => return VerifyReport { result: v, obligations: 0, discharged: 0, solver_calls: 0, query: None },
    };
    let mut report = VerifyReport {
        result: Verification::Unknown { reason: String::new() },
        obligations: job.obligations.len(),
        discharged: job.discharged,
        solver_calls: job.side_queries + 1,
        query: Some(job.text(&[])),
    };
    let name = &sys.entry_func().name;
    // With powers, the quantified query rarely yields models, so look for
    // a counterexample in the tabulated variant first.
    let mut bounded = false;
    let mut first = None;
    if let Some(q) = job.bounded_text(&[]) {
        report.solver_calls += 1;
        if let Ok(Answer::Sat(m)) = solver::run(&q, cfg, &format!("{name}-bounded")) {
            bounded = true;
            first = Some(Ok(Answer::Sat(m)));
        }
    }
    let first = first.unwrap_or_else(|| solver::run(&job.text(&[]), cfg, &format!("{name}-check")));
    let text = |extra: &[String]| if bounded { job.bounded_text(extra).unwrap() } else { job.text(extra) };
    report.result = match first {
        Err(e) => Verification::Unknown { reason: format!("solver error: {e}") },
        Ok(Answer::Unsat) => Verification::Proved,
        Ok(Answer::Unknown(r)) => Verification::Unknown { reason: r },
        Ok(Answer::Sat(model)) => {
            let params = &sys.entry_func().params;
            let mut best = point_of(&model, &job.vars, params);
            // Shrink the counterexample by bisection on the coordinate sum.
            let sum = |p: &BTreeMap<String, BigInt>| p.values().fold(BigInt::from(0), |a, b| a + b);
            let (mut lo, mut hi) = (BigInt::from(0), sum(&best));
            let total = if job.vars.len() == 1 {
                job.vars[0].1.clone()
            } else {
                format!("(+ {})", job.vars.iter().map(|v| v.1.as_str()).collect::<Vec<_>>().join(" "))
            };
            let mut rounds = 0;
            while lo < hi && rounds < 16 && !job.vars.is_empty() {
                rounds += 1;
                let mid: BigInt = (&lo + &hi) / 2;
                let extra = format!("(<= {total} {mid})");
                report.solver_calls += 1;
                match solver::run(&text(&[extra]), cfg, &format!("{name}-shrink{rounds}")) {
                    Ok(Answer::Sat(m)) => {
                        best = point_of(&m, &job.vars, params);
                        hi = sum(&best);
                    }
                    Ok(Answer::Unsat) => lo = mid + 1,
                    _ => break,
                }
            }
            let confirmed = confirm(sys, cand, &best);
            Verification::Disproved { counterexample: best, confirmed }
        }
    };
    report
}
