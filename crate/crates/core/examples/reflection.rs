//! One-step orthant reflection and regulation of a driving path.
//!
//! Run with `cargo run --release --example reflection`.

use srbm_rare::skorokhod::{reflect_step, regulate_path};
use srbm_rare::ModelParams;

pub fn run() -> Vec<f64> {
    let params = ModelParams::from_rows(
        &[-2.0, 1.0],
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        &[vec![1.0, 0.0], vec![-1.0, 1.0]],
        false,
    )
    .expect("valid model");

    // pushing on face 1 along R_1 = (1, -1) drives z2 negative too, so both
    // faces become active
    let res = reflect_step(&[-0.5, 0.3], &params).expect("reflection");
    println!("w = (-0.5, 0.3)  ->  z = {:?}, dy = {:?}", res.z, res.dy);

    let driver = vec![vec![0.2, 0.2], vec![-0.1, 0.3], vec![-0.3, 0.1], vec![0.4, 0.5]];
    let path = regulate_path(&driver, &params).expect("regulation");
    for (k, (phi, eta)) in path.phi.iter().zip(&path.eta).enumerate() {
        println!("t{k}: phi = {phi:?}, eta = {eta:?}");
    }
    res.dy
}

#[allow(dead_code)]
fn main() {
    run();
}
