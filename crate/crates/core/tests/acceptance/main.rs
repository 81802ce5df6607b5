//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. Time bounds are
//! part of each criterion and are measured on the whole criterion.

mod algebra;
mod census;
mod gen;
mod geometry;
mod witness;

use std::process::ExitCode;
use std::time::{Duration, Instant};

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
    /// Draws rejected by a stated genericity condition, with the reason.
    pub log: Vec<String>,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into(), log: Vec::new() }
    }
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "transformation law of the quadric determinant", 10, algebra::transformation_law),
    (2, "pencil wedge inequality and its equality case", 5, algebra::pencil_inequality),
    (3, "pencil reduction terminates and the invariant drops", 60, algebra::pencil_reduction),
    (4, "semistable quadric with a section has integral fiber", 60, algebra::semistable_quadric_fibers),
    (5, "four lines through a general point of a CI(2,2)", 300, geometry::four_lines),
    (6, "dimensions of lines through a point", 300, geometry::line_dimensions),
    (7, "tangent sections and tangent cones of cubics", 300, geometry::tangent_geometry),
    (8, "witness certificates replay", 300, witness::witness_certificates),
    (9, "non-normal CI(2,2) normal forms", 10, geometry::nonnormal_forms),
    (10, "local-global probe on conic bundles", 600, census::hasse_probe_runs),
];

fn main() -> ExitCode {
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for &(id, name, bound, run) in CRITERIA {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome::new(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(bound);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{verdict} {id:>2} {name}: {} [{:.2}s, bound {bound}s{}]", out.detail, took.as_secs_f64(), if in_time { "" } else { ", exceeded" });
        for line in &out.log {
            println!("        {line}");
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
