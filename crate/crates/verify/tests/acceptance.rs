//! Runs every acceptance criterion and prints one pass/fail line for each.

use std::process::ExitCode;

use peglab_verify::criteria::{run_all, CRITERIA};

fn main() -> ExitCode {
    let reports = run_all();
    assert_eq!(reports.len(), CRITERIA.len());
    println!();
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", reports.len() - failed.len(), reports.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
