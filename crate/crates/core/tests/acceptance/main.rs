//! Acceptance suite. Runs every criterion, prints one `PASS`/`FAIL` line per
//! criterion and exits non-zero if any failed.
//!
//! `ACCEPTANCE_ONLY=1,3,10` restricts the run to the listed criteria.

#[path = "../common/mod.rs"]
mod common;

mod energy_oracle;
mod examples;

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

/// A criterion's verdict with a one-line summary.
pub type Outcome = Result<String, String>;

/// Named boolean checks accumulated by one criterion.
#[derive(Default)]
pub struct Checks {
    n: usize,
    failures: Vec<String>,
}

impl Checks {
    pub fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.n += 1;
        if !ok {
            self.failures.push(name.into());
        }
    }

    pub fn finish(self, what: &str) -> Outcome {
        if self.failures.is_empty() {
            Ok(format!("{} {what} passed", self.n))
        } else {
            Err(format!(
                "{} of {} {what} failed: {}",
                self.failures.len(),
                self.n,
                self.failures.join("; ")
            ))
        }
    }
}

type Criterion = (usize, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "potential-kernel oracle", energy_oracle::criterion),
    (2, "plane and data-term examples", examples::criterion),
    (3, "junction tables", junctions::criterion),
    (4, "convex BP exactness", studies::convex_bp_exactness),
    (5, "PCBP descent", studies::pcbp_descent),
    (6, "noise study", studies::noise_study),
    (7, "baseline ordering", studies::baseline_ordering),
    (8, "runtime scaling", studies::runtime_scaling),
    (9, "determinism", studies::determinism),
    (10, "format round-trips", studies::format_round_trips),
];

fn panic_text(e: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = e.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = e.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".into()
    }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    let mut ran = 0;
    for (n, name, run) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome =
            panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| Err(panic_text(e)));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {detail} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
