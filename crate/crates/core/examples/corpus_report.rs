//! Run the bundled corpus and write a JSON-lines report.
//!
//! `cargo run --release --example corpus_report -- [DIR] [OUT]`

use std::path::PathBuf;

use recsolve::dsl::report::{emit_report, summarize, ReportHeader};
use recsolve::harness::{run_corpus, RunConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus")));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("recsolve-report.jsonl"));

    let cfg = RunConfig { domsplit: true, verify: true, ..Default::default() };
    let results = run_corpus(&dir, &cfg).expect("readable corpus directory");
    for r in &results {
        println!("{:<14} {:<11} {:<12} {}", r.name, r.classification, r.verification, r.candidate.as_deref().unwrap_or("-"));
    }
    let s = summarize(&results);
    println!("{} benchmarks, classes {:?}", s.total, s.classification);

    std::fs::write(&out, emit_report(&results, &ReportHeader::from_config(&cfg))).expect("writable output");
    println!("report written to {}", out.display());
}
