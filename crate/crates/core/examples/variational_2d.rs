//! The explicit two-dimensional variational problem: exit velocities, cones
//! of influence, the value function and its minimum over `B`, plus a
//! face-constrained local cost.
//!
//! Run with `cargo run --release --example variational_2d`.

use srbm_rare::varprob::{infimum_over_b_2d, local_cost, solve_vp_2d, vp2d_cost};
use srbm_rare::ModelParams;

pub fn run() -> f64 {
    let params = ModelParams::from_rows(
        &[-2.0, 1.0],
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        &[vec![1.0, 0.0], vec![-1.0, 1.0]],
        false,
    )
    .expect("valid model");
    let sol = solve_vp_2d(&params).expect("recurrent model");
    for (i, f) in sol.faces.iter().enumerate() {
        println!(
            "face {}: p = {:?}, exit velocity = {:?}, reflective = {}, atilde = {:?}",
            i + 1,
            f.p.as_slice(),
            f.a.as_slice(),
            f.reflective,
            f.atilde.as_slice()
        );
    }
    for z in [[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [0.1, 0.1]] {
        println!("I({z:?}) = {:.6}", vp2d_cost(&sol, &z));
    }
    let (inf_b, argmin) = infimum_over_b_2d(&sol);
    println!("inf over B = {inf_b:.6} at {argmin:?}");

    let lc = local_cost(&params, &[0], &[0.0, 1.0], &[0.0, 2.0]).expect("face pair");
    println!(
        "local cost on face 1 from (0,1) to (0,2): J* = {:?}, cost = {:.6}, duration = {:.6}",
        lc.j_star, lc.cost, lc.duration
    );
    inf_b
}

#[allow(dead_code)]
fn main() {
    run();
}
