//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//! Exits non-zero if any criterion fails or errors.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use ultralab_cli::acceptance::{run, CRITERIA};

fn main() -> ExitCode {
    let binary = Path::new(env!("CARGO_BIN_EXE_ultralab"));
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, title) in CRITERIA {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        match run(id, binary) {
            Ok(report) => {
                println!("{} [{:.1}s]", report.line(), start.elapsed().as_secs_f64());
                if !report.pass() {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL: {title} (error: {e})");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
