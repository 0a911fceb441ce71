//! One-shot solver processes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use thiserror::Error;

use super::sexp::{parse_all, Sexp};

/// Environment variable naming the solver command.
pub const SOLVER_ENV: &str = "RECSOLVE_SOLVER";

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Program and leading arguments; the query file is appended.
    pub command: Vec<String>,
    pub timeout: Duration,
    /// Directory receiving every query, when set.
    pub debug_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { command: vec!["z3".into()], timeout: Duration::from_secs(10), debug_dir: None }
    }
}

impl SolverConfig {
    /// Command from `explicit`, else the environment, else `z3`.
    pub fn resolve(explicit: Option<&str>) -> SolverConfig {
        let cmd = explicit
            .map(str::to_string)
            .or_else(|| std::env::var(SOLVER_ENV).ok().filter(|s| !s.trim().is_empty()))
            .unwrap_or_else(|| "z3".into());
        SolverConfig { command: cmd.split_whitespace().map(str::to_string).collect(), ..Default::default() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmtError {
    #[error("solver `{0}` could not be started: {1}")]
    SolverNotFound(String, String),
    #[error("unexpected solver output: {0}")]
    MalformedSolverOutput(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Answer {
    Sat(BTreeMap<String, BigInt>),
    Unsat,
    Unknown(String),
}

fn int_value(s: &Sexp) -> Option<BigInt> {
    match s {
        Sexp::Atom(a) => a.parse().ok(),
        Sexp::List(v) => match v.as_slice() {
            [Sexp::Atom(m), x] if m == "-" => int_value(x).map(|n| -n),
            _ => None,
        },
    }
}

/// Integer constants of a `(get-model)` response.
pub fn parse_model(text: &str) -> Option<BTreeMap<String, BigInt>> {
    let items = parse_all(text)?;
    let mut out = BTreeMap::new();
    let mut visit = |defs: &[Sexp]| {
        for d in defs {
            if let Sexp::List(v) = d {
                if let [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(sort), value] = v.as_slice() {
                    if kw == "define-fun" && args.is_empty() && sort == "Int" {
                        if let Some(n) = int_value(value) {
                            out.insert(name.clone(), n);
                        }
                    }
                }
            }
        }
    };
    for it in &items {
        if let Sexp::List(v) = it {
            // Older solvers wrap the definitions in `(model ...)`.
            match v.first() {
                Some(Sexp::Atom(m)) if m == "model" => visit(&v[1..]),
                _ => visit(v),
            }
        }
    }
    Some(out)
}

/// Classify raw solver output.
pub fn interpret(stdout: &str) -> Result<Answer, SmtError> {
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
    let first = lines.next().unwrap_or("");
    match first {
        "unsat" => Ok(Answer::Unsat),
        "unknown" => Ok(Answer::Unknown("solver-unknown".into())),
        "timeout" => Ok(Answer::Unknown("timeout".into())),
        "sat" => {
            let rest: String = lines.collect::<Vec<_>>().join("\n");
            parse_model(&rest)
                .map(Answer::Sat)
                .ok_or_else(|| SmtError::MalformedSolverOutput(rest.chars().take(200).collect()))
        }
        other => Err(SmtError::MalformedSolverOutput(other.chars().take(200).collect())),
    }
}

/// Run one query. A process still running at the timeout is killed and
/// reported as `Unknown("timeout")`.
pub fn run(query: &str, cfg: &SolverConfig, tag: &str) -> Result<Answer, SmtError> {
    let mut file = tempfile::Builder::new()
        .prefix("recsolve-")
        .suffix(".smt2")
        .tempfile()
        .map_err(|e| SmtError::Io(e.to_string()))?;
    file.write_all(query.as_bytes()).map_err(|e| SmtError::Io(e.to_string()))?;
    file.flush().map_err(|e| SmtError::Io(e.to_string()))?;
    if let Some(dir) = &cfg.debug_dir {
        let _ = std::fs::create_dir_all(dir);
        let _ = std::fs::write(dir.join(format!("{tag}.smt2")), query);
    }
    let (prog, args) = cfg.command.split_first().ok_or_else(|| SmtError::SolverNotFound(String::new(), "empty command".into()))?;
    let mut child = Command::new(prog)
        .args(args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SmtError::SolverNotFound(prog.clone(), e.to_string()))?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + cfg.timeout;
    let status = loop {
        match child.try_wait().map_err(|e| SmtError::Io(e.to_string()))? {
            Some(st) => break Some(st),
            None if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                break None;
            }
            None => std::thread::sleep(Duration::from_millis(2)),
        }
    };
    let out = reader.join().unwrap_or_default();
    if status.is_none() {
        return Ok(Answer::Unknown("timeout".into()));
    }
    match interpret(&out) {
        Ok(a) => Ok(a),
        Err(_) if out.trim().is_empty() => Ok(Answer::Unknown(format!("solver crashed ({})", status.unwrap()))),
        Err(e) => Err(e),
    }
}
