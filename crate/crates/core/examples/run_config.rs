//! Drives a full experiment from the shipped JSON config, the same path the
//! `srbm-rare run` command takes, and prints the CSV table.
//!
//! Run with `cargo run --release --example run_config`.

use srbm_rare::estimators::Algorithm;
use srbm_rare::experiment::{parse_config, run, to_csv, RunManifest, RunOptions};

pub fn run_small() -> RunManifest {
    let mut cfg = parse_config(include_str!("2d_paper.json")).expect("shipped config parses");
    cfg.algorithm.name = Algorithm::Restart;
    cfg.algorithm.replications = 500;
    cfg.scenario.n = vec![5, 10];
    cfg.record_timing = false;
    let manifest = run(&cfg, &RunOptions::default()).expect("run");
    if let Some(sub) = &manifest.subsolution {
        println!(
            "subsolution {:?}: inf_B = {:.4}, T̄(0) = {:.4}",
            sub.kind, sub.inf_b, sub.tbar_origin
        );
    }
    print!("{}", to_csv(&manifest));
    manifest
}

#[allow(dead_code)]
fn main() {
    run_small();
}
