//! Run reports: line-delimited JSON records and a CSV projection.
//!
//! A JSON report is a header line, one `benchmark` line per result in the
//! order given, and a closing `summary` line.

use std::collections::BTreeMap;

use serde::Serialize;

use super::FORMAT_VERSION;
use crate::harness::{BenchmarkResult, Classification, RunConfig};

/// Run-level fields written to the header line.
#[derive(Clone, Debug, Serialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub method: String,
    pub domsplit: bool,
    pub seed: u64,
    pub repeat: usize,
    pub samples: usize,
    pub verify: bool,
}

impl ReportHeader {
    pub fn from_config(cfg: &RunConfig) -> ReportHeader {
        ReportHeader {
            tool: "recsolve".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            method: cfg.method.name().into(),
            domsplit: cfg.domsplit,
            seed: cfg.seed,
            repeat: cfg.repeat,
            samples: cfg.sample.n,
            verify: cfg.verify,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Summary {
    pub total: usize,
    pub errors: usize,
    pub classification: BTreeMap<String, usize>,
    pub verification: BTreeMap<String, usize>,
    /// Category to classification counts; uncategorized entries are filed
    /// under `none`.
    pub by_category: BTreeMap<String, BTreeMap<String, usize>>,
}

fn zero_counts() -> BTreeMap<String, usize> {
    Classification::ALL.iter().map(|c| (c.symbol().to_string(), 0)).collect()
}

pub fn summarize(results: &[BenchmarkResult]) -> Summary {
    let mut s = Summary {
        total: results.len(),
        errors: results.iter().filter(|r| r.error.is_some()).count(),
        classification: zero_counts(),
        verification: BTreeMap::new(),
        by_category: BTreeMap::new(),
    };
    for r in results {
        let sym = r.classification.symbol().to_string();
        *s.classification.entry(sym.clone()).or_default() += 1;
        *s.verification.entry(r.verification.clone()).or_default() += 1;
        let cat = r.category.clone().unwrap_or_else(|| "none".into());
        *s.by_category.entry(cat).or_insert_with(zero_counts).entry(sym).or_default() += 1;
    }
    s
}

#[derive(Serialize)]
struct Line<'a, T: Serialize> {
    #[serde(rename = "format-version")]
    format_version: u32,
    record: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

fn line<T: Serialize>(record: &'static str, body: &T) -> String {
    let v: u32 = FORMAT_VERSION.parse().unwrap_or(1);
    serde_json::to_string(&Line { format_version: v, record, body }).expect("report records serialize")
}

/// The JSON-lines report.
pub fn emit_report(results: &[BenchmarkResult], header: &ReportHeader) -> String {
    let mut out = line("header", header);
    out.push('\n');
    for r in results {
        out.push_str(&line("benchmark", r));
        out.push('\n');
    }
    out.push_str(&line("summary", &summarize(results)));
    out.push('\n');
    out
}

/// One row per benchmark with the headline fields.
pub fn emit_csv(results: &[BenchmarkResult]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    let head = [
        "format-version",
        "name",
        "category",
        "method",
        "candidate",
        "score",
        "verification",
        "classification",
        "sample_s",
        "fit_s",
        "verify_s",
        "seed",
    ];
    w.write_record(head).expect("in-memory csv");
    for r in results {
        w.write_record([
            FORMAT_VERSION.to_string(),
            r.name.clone(),
            r.category.clone().unwrap_or_default(),
            r.method.name().to_string(),
            r.candidate.clone().unwrap_or_default(),
            format!("{}", r.score),
            r.verification.clone(),
            r.classification.symbol().to_string(),
            format!("{:.3}", r.timings.sample),
            format!("{:.3}", r.timings.fit),
            format!("{:.3}", r.timings.verify),
            r.seed.to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

/// The report with every `timings` object removed, for comparing runs.
pub fn without_timings(report: &str) -> String {
    report
        .lines()
        .map(|l| match serde_json::from_str::<serde_json::Value>(l) {
            Ok(mut v) => {
                if let Some(o) = v.as_object_mut() {
                    o.remove("timings");
                }
                v.to_string()
            }
            Err(_) => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}
