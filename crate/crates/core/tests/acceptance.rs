//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! `cargo test -p vpt-core --test acceptance -- <filter>` runs a subset.

use std::process::ExitCode;

fn main() -> ExitCode {
    // libtest-style flags from `cargo test` are ignored; a bare word filters.
    let only = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let reports = vpt_core::acceptance::run(only.as_deref());
    for r in &reports {
        println!("{}", r.line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", reports.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
