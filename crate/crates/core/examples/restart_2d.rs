//! RESTART on the two-dimensional model with the exact
//! subsolution as importance function. Offspring carry killing thresholds
//! and die when they fall back below the region they were created in.
//!
//! Run with `cargo run --release --example restart_2d [n] [replications]`.

use srbm_rare::estimators::restart_estimate;
use srbm_rare::{EstimateReport, ModelParams, Scenario, SimConfig, SplitConfig, Subsolution};

pub fn run(n: u32, reps: u64) -> EstimateReport {
    let params = ModelParams::from_rows(
        &[-2.0, 1.0],
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        &[vec![1.0, 0.0], vec![-1.0, 1.0]],
        false,
    )
    .expect("valid model");
    let sub = Subsolution::exact_2d(&params).expect("recurrent model");
    // unscaled start z = (0.1, ...), so the scaled process starts at z / n
    let scenario = Scenario::new(n, 0.15, vec![0.1 / n as f64, 0.1 / n as f64]).expect("valid scenario");
    let sim = SimConfig::new(SimConfig::default_step(n), 100_000_000, 4).expect("valid step");
    let cfg = SplitConfig {
        replications: reps,
        ..SplitConfig::default()
    };
    let report = restart_estimate(&scenario, &params, &sim, &cfg, &sub).expect("estimate");
    println!(
        "n = {n}: p = {:.4e}, SE = {:.2e}, 95% CI = [{:.3e}, {:.3e}], particles mean {:.2} max {}, {:.1}s",
        report.estimate,
        report.std_error.unwrap_or(f64::NAN),
        report.ci95[0],
        report.ci95[1],
        report.particles_mean,
        report.particles_max,
        report.wall_time
    );
    report
}

#[allow(dead_code)]
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n = args.get(1).map_or(5, |s| s.parse().expect("n"));
    let reps = args.get(2).map_or(1000, |s| s.parse().expect("replications"));
    run(n, reps);
}
