//! Memoized first-match evaluation of recurrence systems under a budget.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use crate::model::RecurrenceSystem;
use crate::value::{eval_bool, eval_with, EvalError, Env, Num, Semantics};

#[derive(Clone, Copy, Debug)]
pub struct Budget {
    /// Calls allowed per top-level evaluation.
    pub max_calls: u64,
    pub max_depth: usize,
    /// Wall clock for one `eval_fun`, or for a whole batch.
    pub wall: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_calls: 1_000_000, max_depth: 10_000, wall: Duration::from_secs(2) }
    }
}

pub struct Evaluator<'a> {
    sys: &'a RecurrenceSystem,
    budget: Budget,
    memo: HashMap<(usize, Vec<BigInt>), Num>,
    index: HashMap<&'a str, usize>,
    calls: u64,
    depth: usize,
    deadline: Instant,
    /// Total calls made, across top-level evaluations.
    pub total_calls: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(sys: &'a RecurrenceSystem, budget: Budget) -> Self {
        let index = sys.funcs.iter().enumerate().map(|(i, f)| (f.name.as_str(), i)).collect();
        Evaluator {
            sys,
            budget,
            memo: HashMap::new(),
            index,
            calls: 0,
            depth: 0,
            deadline: Instant::now() + budget.wall,
            total_calls: 0,
        }
    }

    /// Restart the wall clock.
    pub fn reset_clock(&mut self) {
        self.deadline = Instant::now() + self.budget.wall;
    }

    pub fn timed_out(&self) -> bool {
        Instant::now() > self.deadline
    }

    /// Evaluate `f(args)`; the arguments must satisfy `f`'s precondition.
    pub fn eval_fun(&mut self, f: &str, args: &[BigInt]) -> Result<Num, EvalError> {
        let idx = *self.index.get(f).ok_or_else(|| EvalError::UnknownFunction(f.to_string()))?;
        let def = &self.sys.funcs[idx];
        let env: Env = def.params.iter().cloned().zip(args.iter().cloned()).collect();
        if !eval_bool(&def.pre, &env).unwrap_or(false) {
            return Err(EvalError::Precondition);
        }
        self.calls = 0;
        self.depth = 0;
        self.call(idx, args.to_vec())
    }

    fn call(&mut self, idx: usize, args: Vec<BigInt>) -> Result<Num, EvalError> {
        let key = (idx, args);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        self.calls += 1;
        self.total_calls += 1;
        if self.calls > self.budget.max_calls {
            return Err(EvalError::BudgetExceeded("call count"));
        }
        if self.depth >= self.budget.max_depth {
            return Err(EvalError::BudgetExceeded("recursion depth"));
        }
        if self.calls.is_multiple_of(1024) && self.timed_out() {
            return Err(EvalError::BudgetExceeded("wall clock"));
        }
        let sys = self.sys;
        let def = &sys.funcs[idx];
        let env: Env = def.params.iter().cloned().zip(key.1.iter().cloned()).collect();
        let case = def
            .cases
            .iter()
            .find(|c| eval_bool(&c.guard, &env).unwrap_or(false))
            .ok_or_else(|| EvalError::NoMatchingCase {
                func: def.name.clone(),
                args: key.1.iter().map(|a| a.to_string()).collect(),
            })?;
        self.depth += 1;
        let result = stacker::maybe_grow(64 * 1024, 4 * 1024 * 1024, || {
            eval_with(&case.body, &env, Semantics::Strict, &mut |g, a| {
                let j = *self.index.get(g).ok_or_else(|| EvalError::UnknownFunction(g.to_string()))?;
                self.call(j, a)
            })
        });
        self.depth -= 1;
        let v = result?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }
}

/// Evaluate one call with a fresh memo table.
pub fn eval_fun(sys: &RecurrenceSystem, f: &str, args: &[BigInt], budget: Budget) -> Result<Num, EvalError> {
    Evaluator::new(sys, budget).eval_fun(f, args)
}

/// Evaluate many points with a shared memo table and one wall clock for the
/// whole batch. The second component is true when the clock ran out.
pub fn eval_batch(
    sys: &RecurrenceSystem,
    f: &str,
    points: &[Vec<i64>],
    budget: Budget,
) -> (Vec<Result<Num, EvalError>>, bool) {
    let mut ev = Evaluator::new(sys, budget);
    let mut out = Vec::with_capacity(points.len());
    let mut timed_out = false;
    for p in points {
        if timed_out || ev.timed_out() {
            timed_out = true;
            out.push(Err(EvalError::BudgetExceeded("wall clock")));
            continue;
        }
        let args: Vec<BigInt> = p.iter().map(|&v| BigInt::from(v)).collect();
        out.push(ev.eval_fun(f, &args));
    }
    (out, timed_out)
}
