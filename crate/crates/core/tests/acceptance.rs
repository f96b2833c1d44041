// SPDX-License-Identifier: Apache-2.0

//! Exit gate: runs every acceptance criterion and prints one PASS or FAIL
//! line per criterion with the measured values behind it. Exits nonzero if
//! any criterion fails. Criterion numbers given as arguments restrict the run.

use std::process::ExitCode;

use photon_window::parallel::Executor;
use photon_window::validation::{run_criterion, ValidationConfig};

fn main() -> ExitCode {
    let mut cfg = ValidationConfig::default();
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if !picked.is_empty() {
        cfg.criteria = picked;
    }
    let exec = Executor::default();
    let mut failed = Vec::new();
    for &id in &cfg.criteria {
        let report = run_criterion(id, &cfg, &exec);
        print!("{}", report.render());
        if !report.passed() {
            failed.push(id);
        }
    }
    let total = cfg.criteria.len();
    println!("acceptance: {} of {} criteria passed", total - failed.len(), total);
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
