//! Crude Monte Carlo for the three-dimensional model at a small scale.
//!
//! Run with `cargo run --release --example standard_mc [n] [replications]`.

use srbm_rare::estimators::standard_mc;
use srbm_rare::{EstimateReport, ModelParams, Scenario, SimConfig};

pub fn run(n: u32, reps: u64) -> EstimateReport {
    let params = ModelParams::from_rows(
        &[-2.0, -1.0, -1.0],
        &[vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 3.0]],
        &[vec![3.0, -1.0, -1.0], vec![-1.0, 2.0, -1.0], vec![-1.0, -1.0, 2.0]],
        true,
    )
    .expect("valid model");
    // unscaled start z = (0.1, ...), so the scaled process starts at z / n
    let scenario = Scenario::new(n, 0.15, vec![0.1 / n as f64; 3]).expect("valid scenario");
    let sim = SimConfig::new(SimConfig::default_step(n), 100_000_000, 17).expect("valid step");
    let report = standard_mc(&scenario, &params, &sim, reps).expect("estimate");
    println!(
        "n = {n}: p = {:.4e}, SE = {:.2e}, 95% CI = [{:.3e}, {:.3e}], {:.1}s",
        report.estimate,
        report.std_error.unwrap_or(f64::NAN),
        report.ci95[0],
        report.ci95[1],
        report.wall_time
    );
    report
}

#[allow(dead_code)]
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n = args.get(1).map_or(2, |s| s.parse().expect("n"));
    let reps = args.get(2).map_or(20_000, |s| s.parse().expect("replications"));
    run(n, reps);
}
