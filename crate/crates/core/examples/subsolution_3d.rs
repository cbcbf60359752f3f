//! Scaled-L1 subsolution for the three-dimensional M-matrix model: the
//! scaling factor, the face and direction attaining it, and a randomized
//! check of the subsolution inequality.
//!
//! Run with `cargo run --release --example subsolution_3d`.

use srbm_rare::simulate::replication_rng;
use srbm_rare::subsolution::{compute_scaling, subsolution_inequality_check, ScalingOptions};
use srbm_rare::{ModelParams, Subsolution};

pub fn model() -> ModelParams {
    ModelParams::from_rows(
        &[-2.0, -1.0, -1.0],
        &[vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 3.0]],
        &[vec![3.0, -1.0, -1.0], vec![-1.0, 2.0, -1.0], vec![-1.0, -1.0, 2.0]],
        true,
    )
    .expect("valid model")
}

pub fn run() -> (f64, usize) {
    let params = model();
    let scaling = compute_scaling(
        &params,
        &ScalingOptions {
            resolution: 24,
            refine_iters: 200,
            include_interior: true,
        },
    )
    .expect("scaling factor");
    println!("r = {:.6}", scaling.r);
    println!("attained on face {:?} along {:?}", scaling.face, scaling.direction);

    let sub = Subsolution::scaled_l1(scaling.r);
    println!("T̄(0) = {:.6}", sub.tbar(&[0.0; 3]));
    let report = subsolution_inequality_check(&sub, &params, 1000, &mut replication_rng(5, 0));
    println!(
        "inequality check: {} samples, {} violations, worst margin {:.3e}",
        report.samples, report.violations, report.worst_margin
    );
    (scaling.r, report.violations)
}

#[allow(dead_code)]
fn main() {
    run();
}
