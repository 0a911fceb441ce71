//! Guess closed forms of recurrence relations from sampled values, then try
//! to prove them with an SMT solver.

pub mod dsl;
pub mod eval;
pub mod guess;
pub mod harness;
pub mod linear;
pub mod model;
pub mod rewrite;
pub mod sample;
pub mod smt;
pub mod symreg;
pub mod value;
