mod common;

use common::{paper_2d, paper_3d};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srbm_rare::model::{l1_sum, mask_indices};
use srbm_rare::subsolution::{
    compute_scaling, compute_scaling_r, direction_grid, in_direction_set, level_from_value, level_index,
    subsolution_inequality_check, ScalingOptions, Subsolution, SubsolutionKind,
};
use srbm_rare::varprob::local_cost_direction;

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Uniform-ish random point of the direction set of `k`.
fn random_direction<R: Rng>(rng: &mut R, d: usize, k: &[usize]) -> Vec<f64> {
    loop {
        let mut v = vec![0.0; d];
        for (i, x) in v.iter_mut().enumerate() {
            if !k.contains(&i) {
                *x = rng.random_range(-1.0..1.0);
            }
        }
        let n = l1(&v);
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            if in_direction_set(k, &v) {
                return v;
            }
        }
    }
}

#[test]
fn grid_points_lie_in_the_direction_set() {
    for d in 2..=4 {
        for mask in 0..(1u32 << d) - 1 {
            let k = mask_indices(mask, d);
            let grid = direction_grid(d, &k, 6).unwrap();
            assert!(!grid.is_empty());
            for v in &grid {
                assert!((l1(v) - 1.0).abs() < 1e-12, "{v:?}");
                assert!(in_direction_set(&k, v), "K={k:?} v={v:?}");
            }
        }
    }
}

#[test]
fn grid_for_the_interior_in_two_dimensions() {
    let grid = direction_grid(2, &[], 2).unwrap();
    assert!(grid.contains(&vec![1.0, 0.0]));
    assert!(grid.contains(&vec![0.0, 1.0]));
    assert!(grid.contains(&vec![0.5, -0.5]));
    assert!(grid.contains(&vec![-1.0, 0.0]));
    assert!(!grid.contains(&vec![-0.5, -0.5]));
}

#[test]
fn grid_is_deterministic() {
    assert_eq!(direction_grid(3, &[1], 7).unwrap(), direction_grid(3, &[1], 7).unwrap());
}

#[test]
fn scaling_factor_is_maximal_out_of_sample() {
    let p = paper_3d();
    let r = compute_scaling_r(&p, 16, 200).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mask = rng.random_range(0..7u32);
        let k = mask_indices(mask, 3);
        let v = random_direction(&mut rng, 3, &k);
        let cost = local_cost_direction(&p, &k, &v).unwrap();
        worst = worst.max(l1(&v) / cost);
    }
    assert!(worst <= r + 1e-3, "sampled ratio {worst} exceeds r = {r}");
}

#[test]
fn scaling_factor_converges_under_mesh_doubling() {
    let p = paper_3d();
    for res in [8, 12] {
        let a = compute_scaling_r(&p, res, 200).unwrap();
        let b = compute_scaling_r(&p, 2 * res, 200).unwrap();
        assert!((a - b).abs() < 1e-2, "res {res}: {a} vs {b}");
    }
}

#[test]
fn scaling_factor_is_deterministic() {
    let p = paper_3d();
    assert_eq!(
        compute_scaling_r(&p, 10, 100).unwrap(),
        compute_scaling_r(&p, 10, 100).unwrap()
    );
}

#[test]
fn boundary_only_scaling_bounds_the_two_dimensional_value() {
    let p = paper_2d();
    let s = compute_scaling(
        &p,
        &ScalingOptions {
            resolution: 16,
            refine_iters: 100,
            include_interior: false,
        },
    )
    .unwrap();
    assert!(1.0 / s.r <= 1.0 + 1e-12, "r = {}", s.r);
}

#[test]
fn scaled_l1_rejects_models_outside_its_class() {
    assert!(Subsolution::scaled_l1_for(&paper_2d(), 8, 10).is_err());
}

#[test]
fn inequality_holds_on_the_three_dimensional_model() {
    let p = paper_3d();
    let sub = Subsolution::scaled_l1_for(&p, 16, 200).unwrap();
    let rep = subsolution_inequality_check(&sub, &p, 1000, &mut ChaCha8Rng::seed_from_u64(5));
    assert_eq!(rep.samples, 1000);
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn inequality_holds_for_the_exact_two_dimensional_subsolution() {
    let p = paper_2d();
    let sub = Subsolution::exact_2d(&p).unwrap();
    let rep = subsolution_inequality_check(&sub, &p, 1000, &mut ChaCha8Rng::seed_from_u64(6));
    assert_eq!(rep.samples, 1000);
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn tbar_is_nonpositive_on_b() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let subs = [
        (Subsolution::exact_2d(&paper_2d()).unwrap(), 2),
        (Subsolution::scaled_l1(14.9), 3),
    ];
    for (sub, d) in &subs {
        let mut sampled = 0;
        while sampled < 1000 {
            let mut x: Vec<f64> = (0..*d).map(|_| rng.random::<f64>()).collect();
            let s = l1(&x);
            // half the draws on the hyperplane sum = 1, half beyond it
            let target = if rng.random::<bool>() {
                1.0
            } else {
                1.0 + 2.0 * rng.random::<f64>()
            };
            x.iter_mut().for_each(|v| *v *= target / s);
            // rescaling can round the sum just below 1, outside B
            if l1_sum(&x) < 1.0 {
                continue;
            }
            sampled += 1;
            assert!(sub.tbar(&x) <= 0.0, "{:?} at {x:?}: {}", sub.kind(), sub.tbar(&x));
        }
    }
}

#[test]
fn tbar_origin_values() {
    let e = Subsolution::exact_2d(&paper_2d()).unwrap();
    assert_eq!(e.kind(), SubsolutionKind::Exact2D);
    assert!((e.tbar(&[0.0, 0.0]) - 1.0).abs() < 1e-10);
    assert!(e.tbar(&[0.0, 1.0]).abs() < 1e-10);
    let s = Subsolution::scaled_l1(4.0);
    assert_eq!(s.tbar(&[0.0, 0.0, 0.0]), 0.25);
    assert_eq!(s.tbar(&[0.5, 0.25, 0.25]), 0.0);
    assert_eq!(s.summary().tbar_origin, 0.25);
}

#[test]
fn level_zero_exactly_on_b() {
    let sub = Subsolution::exact_2d(&paper_2d()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let z = [rng.random::<f64>() * 1.2, rng.random::<f64>() * 1.2];
        let in_b = z[0] + z[1] >= 1.0;
        assert_eq!(level_index(&sub, 1.0, 2, 10.0, &z) == 0, in_b, "{z:?}");
    }
}

#[test]
fn level_drops_by_one_per_threshold() {
    let (delta, n) = (0.5, 7.0);
    for j in 0..20 {
        let thr = j as f64 * delta / n;
        assert_eq!(level_from_value(thr, delta, n), j + 1);
        assert_eq!(level_from_value(thr + 1e-9, delta, n), j + 2);
    }
}

proptest! {
    #[test]
    fn scaled_l1_is_monotone(u in prop::collection::vec(0.0f64..2.0, 3), bump in prop::collection::vec(0.0f64..1.0, 3), r in 0.5f64..20.0) {
        let sub = Subsolution::scaled_l1(r);
        let v: Vec<f64> = u.iter().zip(&bump).map(|(a, b)| a + b).collect();
        prop_assert!(sub.tbar(&u) >= sub.tbar(&v));
    }

    #[test]
    fn scaled_l1_is_lipschitz(u in prop::collection::vec(0.0f64..2.0, 3), v in prop::collection::vec(0.0f64..2.0, 3), r in 0.5f64..20.0) {
        let sub = Subsolution::scaled_l1(r);
        let dist = u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!((sub.tbar(&u) - sub.tbar(&v)).abs() <= 3.0 / r * dist + 1e-12);
    }

    #[test]
    fn level_is_monotone_in_the_importance_value(a in -1.0f64..3.0, b in -1.0f64..3.0, n in 1.0f64..50.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(level_from_value(lo, 1.0, n) <= level_from_value(hi, 1.0, n));
    }
}
