//! Drive verification suites through the same configuration path as the
//! `twistorlab verify` command and print the reports.
//!
//! ```text
//! cargo run --release --example run_suites -- brackets --metric s4:1 --samples 5
//! ```

use twistorlab::cli::{emit_reports, parse_config, run_config, Format};

pub fn main() -> twistorlab::Result<()> {
    run(std::env::args().skip(1).collect())
}

pub fn run(mut args: Vec<String>) -> twistorlab::Result<()> {
    if args.is_empty() {
        args = ["domega", "--samples", "5", "--metric", "conformal_bump:0.1"]
            .map(String::from)
            .to_vec();
    }
    let cfg = parse_config(std::iter::once("verify".to_string()).chain(args), None)?;
    let outcomes = run_config(&cfg)?;
    for o in &outcomes {
        for c in &o.checks {
            println!("  check {c}");
        }
    }
    let reports: Vec<_> = outcomes.into_iter().map(|o| o.report).collect();
    print!(
        "{}",
        String::from_utf8_lossy(&emit_reports(&reports, Format::Text)?)
    );
    Ok(())
}
