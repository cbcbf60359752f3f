#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use srbm_rare::ModelParams;

pub fn paper_2d() -> ModelParams {
    ModelParams::from_rows(
        &[-2.0, 1.0],
        &[vec![1.0, 0.0], vec![0.0, 1.0]],
        &[vec![1.0, 0.0], vec![-1.0, 1.0]],
        false,
    )
    .unwrap()
}

pub fn paper_3d() -> ModelParams {
    ModelParams::from_rows(
        &[-2.0, -1.0, -1.0],
        &[vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 3.0]],
        &[vec![3.0, -1.0, -1.0], vec![-1.0, 2.0, -1.0], vec![-1.0, -1.0, 2.0]],
        true,
    )
    .unwrap()
}

/// Strictly column- and row-diagonally dominant Z-matrix, hence a
/// nonsingular M-matrix.
pub fn random_m_matrix<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i != j {
                *x = -rng.random::<f64>() / d as f64;
            }
        }
    }
    for i in 0..d {
        let off: f64 = (0..d).filter(|&j| j != i).map(|j| m[i][j].abs() + m[j][i].abs()).sum();
        m[i][i] = off + 0.05 + rng.random::<f64>();
    }
    m
}

pub fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn m_matrix_model(refl: &[Vec<f64>]) -> ModelParams {
    let d = refl.len();
    ModelParams::from_rows(&vec![-1.0; d], &identity(d), refl, true).unwrap()
}

pub fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows.len();
    DMatrix::from_fn(d, d, |i, j| rows[i][j])
}
