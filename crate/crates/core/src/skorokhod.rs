//! Orthant reflection: the one-step linear complementarity problem and the
//! regulation of piecewise-constant driving paths.
//!
//! Given `w`, find `dy >= 0` with `z = w + R dy >= 0` and `z_i dy_i = 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::ReflectError;
use crate::model::{mask_indices, ModelParams};
use crate::MAX_DIM;

const FEAS_TOL: f64 = 1e-12;
/// Largest dimension solved by active-set enumeration; above it the
/// complementary pivot method is used.
pub const ENUMERATION_MAX_DIM: usize = 4;
const LEMKE_MAX_PIVOTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectResult {
    pub z: Vec<f64>,
    pub dy: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Active sets tried by ascending size, then lexicographically.
    Enumeration,
    /// Lemke's complementary pivot method with covering vector `1`.
    Lemke,
}

#[derive(Debug, Clone)]
struct ActiveSet {
    idx: Vec<usize>,
    // row-major inverse of R[idx, idx]
    inv: Vec<f64>,
}

/// Precomputed one-step reflection for a fixed reflection matrix.
#[derive(Debug, Clone)]
pub struct Reflector {
    d: usize,
    r: Vec<f64>,
    strategy: Strategy,
    sets: Vec<ActiveSet>,
}

impl Reflector {
    pub fn new(refl: &DMatrix<f64>) -> Self {
        let strategy = if refl.nrows() <= ENUMERATION_MAX_DIM {
            Strategy::Enumeration
        } else {
            Strategy::Lemke
        };
        Self::with_strategy(refl, strategy)
    }

    pub fn with_strategy(refl: &DMatrix<f64>, strategy: Strategy) -> Self {
        let d = refl.nrows();
        let r: Vec<f64> = (0..d * d).map(|k| refl[(k / d, k % d)]).collect();
        let mut sets = Vec::new();
        if strategy == Strategy::Enumeration {
            let mut masks: Vec<u32> = (1u32..(1 << d)).collect();
            masks.sort_by_key(|&m| (m.count_ones(), mask_indices(m, d)));
            for mask in masks {
                let idx = mask_indices(mask, d);
                let k = idx.len();
                let sub = DMatrix::from_fn(k, k, |i, j| refl[(idx[i], idx[j])]);
                if let Some(inv) = sub.try_inverse() {
                    let inv = (0..k * k).map(|q| inv[(q / k, q % k)]).collect();
                    sets.push(ActiveSet { idx, inv });
                }
            }
        }
        Self { d, r, strategy, sets }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Reflects `w`, writing the reflected point into `z` and the pushing
    /// increment into `dy`. All slices have length `d`.
    pub fn reflect_into(&self, w: &[f64], z: &mut [f64], dy: &mut [f64]) -> Result<(), ReflectError> {
        let d = self.d;
        dy[..d].fill(0.0);
        if w.iter().all(|&x| x >= 0.0) {
            z[..d].copy_from_slice(&w[..d]);
            return Ok(());
        }
        match self.strategy {
            Strategy::Enumeration => self.enumerate(w, z, dy),
            Strategy::Lemke => {
                lemke(&self.r, w, d, dy)?;
                self.finish(w, z, dy);
                Ok(())
            }
        }
    }

    fn enumerate(&self, w: &[f64], z: &mut [f64], dy: &mut [f64]) -> Result<(), ReflectError> {
        let d = self.d;
        let mut sol = [0.0f64; MAX_DIM];
        'sets: for set in &self.sets {
            let k = set.idx.len();
            for a in 0..k {
                let mut s = 0.0;
                for b in 0..k {
                    s -= set.inv[a * k + b] * w[set.idx[b]];
                }
                if s < -FEAS_TOL {
                    continue 'sets;
                }
                sol[a] = s.max(0.0);
            }
            for i in 0..d {
                if set.idx.contains(&i) {
                    continue;
                }
                let mut zi = w[i];
                for (a, &j) in set.idx.iter().enumerate() {
                    zi += self.r[i * d + j] * sol[a];
                }
                if zi < -FEAS_TOL {
                    continue 'sets;
                }
            }
            for (a, &j) in set.idx.iter().enumerate() {
                dy[j] = sol[a];
            }
            self.finish(w, z, dy);
            for &j in &set.idx {
                z[j] = 0.0;
            }
            return Ok(());
        }
        Err(ReflectError::NoSolution)
    }

    fn finish(&self, w: &[f64], z: &mut [f64], dy: &[f64]) {
        let d = self.d;
        for i in 0..d {
            let mut zi = w[i];
            for j in 0..d {
                zi += self.r[i * d + j] * dy[j];
            }
            z[i] = if dy[i] > 0.0 { 0.0 } else { zi.max(0.0) };
        }
    }

    pub fn reflect(&self, w: &[f64]) -> Result<ReflectResult, ReflectError> {
        let mut z = vec![0.0; self.d];
        let mut dy = vec![0.0; self.d];
        self.reflect_into(w, &mut z, &mut dy)?;
        Ok(ReflectResult { z, dy })
    }
}

/// Lemke's method for `z = q + M x >= 0, x >= 0, z.x = 0` with `M = R`
/// (row-major) and `q = w`.
fn lemke(m: &[f64], q: &[f64], d: usize, x_out: &mut [f64]) -> Result<(), ReflectError> {
    // columns: z_0..z_{d-1}, x_0..x_{d-1}, artificial, rhs
    let art = 2 * d;
    let rhs = 2 * d + 1;
    let cols = 2 * d + 2;
    let mut t = vec![0.0; d * cols];
    for i in 0..d {
        t[i * cols + i] = 1.0;
        for j in 0..d {
            t[i * cols + d + j] = -m[i * d + j];
        }
        t[i * cols + art] = -1.0;
        t[i * cols + rhs] = q[i];
    }
    let mut basis: Vec<usize> = (0..d).collect();

    let pivot = |t: &mut Vec<f64>, row: usize, col: usize| {
        let p = t[row * cols + col];
        for c in 0..cols {
            t[row * cols + c] /= p;
        }
        for i in 0..d {
            if i == row {
                continue;
            }
            let f = t[i * cols + col];
            if f != 0.0 {
                for c in 0..cols {
                    t[i * cols + c] -= f * t[row * cols + c];
                }
            }
        }
    };

    let (mut row, _) = q
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    pivot(&mut t, row, art);
    let mut leaving = basis[row];
    basis[row] = art;
    let complement = |v: usize| if v < d { v + d } else { v - d };
    let mut entering = complement(leaving);

    for _ in 0..LEMKE_MAX_PIVOTS {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..d {
            let a = t[i * cols + entering];
            if a > 1e-12 {
                let ratio = t[i * cols + rhs] / a;
                let better = match best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < br - 1e-12 || (ratio <= br + 1e-12 && basis[i] == art && basis[bi] != art)
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = best else {
            return Err(ReflectError::NoSolution);
        };
        row = r;
        pivot(&mut t, row, entering);
        leaving = basis[row];
        basis[row] = entering;
        if leaving == art {
            x_out[..d].fill(0.0);
            for (i, &b) in basis.iter().enumerate() {
                if (d..2 * d).contains(&b) {
                    x_out[b - d] = t[i * cols + rhs].max(0.0);
                }
            }
            return Ok(());
        }
        entering = complement(leaving);
    }
    Err(ReflectError::NoSolution)
}

/// One-step reflection with the production solver held by `params`.
pub fn reflect_step(w: &[f64], params: &ModelParams) -> Result<ReflectResult, ReflectError> {
    params.reflector().reflect(w)
}

/// Brute-force reflection: tries every active set in increasing bitmask
/// order with a fresh LU solve and returns the first complementary pair.
/// Kept independent of [`Reflector`] for use as a test oracle.
pub fn reflect_step_oracle(w: &[f64], params: &ModelParams) -> Result<ReflectResult, ReflectError> {
    let d = params.dim();
    let r = params.refl();
    let wv = DVector::from_column_slice(w);
    for mask in 0u32..(1 << d) {
        let idx = mask_indices(mask, d);
        let mut dy = DVector::zeros(d);
        if !idx.is_empty() {
            let k = idx.len();
            let sub = DMatrix::from_fn(k, k, |i, j| r[(idx[i], idx[j])]);
            let b = DVector::from_fn(k, |i, _| -w[idx[i]]);
            let Some(sol) = sub.lu().solve(&b) else {
                continue;
            };
            if sol.iter().any(|&x| x < -FEAS_TOL) {
                continue;
            }
            for (a, &j) in idx.iter().enumerate() {
                dy[j] = sol[a].max(0.0);
            }
        }
        let z = &wv + r * &dy;
        if z.iter().enumerate().any(|(i, &x)| !idx.contains(&i) && x < -FEAS_TOL) {
            continue;
        }
        let z: Vec<f64> = z
            .iter()
            .enumerate()
            .map(|(i, &x)| if idx.contains(&i) { 0.0 } else { x.max(0.0) })
            .collect();
        return Ok(ReflectResult {
            z,
            dy: dy.iter().copied().collect(),
        });
    }
    Err(ReflectError::NoSolution)
}

/// Regulated path and cumulative pushing for a piecewise-constant driver.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulatedPath {
    pub phi: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
}

/// Applies the Skorokhod map to the driver `psi(t_0), psi(t_1), ...`, one
/// reflection per increment. `driver[0]` must lie in the orthant.
pub fn regulate_path(driver: &[Vec<f64>], params: &ModelParams) -> Result<RegulatedPath, ReflectError> {
    let d = params.dim();
    let Some(first) = driver.first() else {
        return Ok(RegulatedPath {
            phi: vec![],
            eta: vec![],
        });
    };
    if first.iter().any(|&x| x < 0.0) {
        return Err(ReflectError::NoSolution);
    }
    let reflector = params.reflector();
    let mut phi = vec![first.clone()];
    let mut eta = vec![vec![0.0; d]];
    let mut w = vec![0.0; d];
    let mut z = vec![0.0; d];
    let mut dy = vec![0.0; d];
    for k in 1..driver.len() {
        let prev = &phi[k - 1];
        for i in 0..d {
            w[i] = prev[i] + driver[k][i] - driver[k - 1][i];
        }
        reflector.reflect_into(&w, &mut z, &mut dy)?;
        let cum: Vec<f64> = eta[k - 1].iter().zip(&dy).map(|(a, b)| a + b).collect();
        phi.push(z.clone());
        eta.push(cum);
    }
    Ok(RegulatedPath { phi, eta })
}
