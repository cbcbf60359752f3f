//! Euler simulation of the scaled discretized SRBM `Z_n`.
//!
//! Time runs on the scaled clock: one step of length `h` adds `theta * h`
//! plus a Gaussian increment with covariance `Sigma * h / n`, followed by a
//! one-step orthant reflection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ReflectError, SimError};
use crate::model::{l1_sum, ModelParams, Scenario};
use crate::MAX_DIM;

pub const DEFAULT_MAX_STEPS: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Scaled-time step.
    pub h: f64,
    /// Per-path (per-particle) step cap.
    pub max_steps: u64,
    pub rng_seed: u64,
}

impl SimConfig {
    pub fn new(h: f64, max_steps: u64, rng_seed: u64) -> Result<Self, ModelError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(ModelError::Scenario(format!("step size {h} must be positive")));
        }
        if max_steps == 0 {
            return Err(ModelError::Scenario("max_steps must be at least 1".into()));
        }
        Ok(Self { h, max_steps, rng_seed })
    }

    /// Default step rule `h = 1 / (1000 n)`.
    pub fn default_step(n: u32) -> f64 {
        1.0 / (1000.0 * n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hit {
    A,
    B,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub hit: Hit,
    pub exit_point: Vec<f64>,
    pub steps: u64,
    pub elapsed: f64,
}

/// Result of [`run_segment`]: the first state where the stopping predicate
/// fired.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub position: Vec<f64>,
    pub steps: u64,
    pub elapsed: f64,
}

/// Source of independent standard normal variates.
pub trait NormalSource {
    fn fill_normal(&mut self, out: &mut [f64]);
}

impl<R: Rng + ?Sized> NormalSource for R {
    fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.sample(StandardNormal);
        }
    }
}

/// Deterministic noise source returning zeros; turns the simulator into its
/// fluid (drift-only) limit.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NormalSource for ZeroNoise {
    fn fill_normal(&mut self, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Independent generator for replication `rep` under master seed `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Precomputed Euler step for fixed `(params, h, n)`.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    params: &'a ModelParams,
    d: usize,
    h: f64,
    drift: [f64; MAX_DIM],
    // row-major lower factor scaled by sqrt(h / n)
    chol: [f64; MAX_DIM * MAX_DIM],
}

impl<'a> Stepper<'a> {
    pub fn new(params: &'a ModelParams, h: f64, n: u32) -> Self {
        let d = params.dim();
        let mut drift = [0.0; MAX_DIM];
        for (i, x) in drift.iter_mut().take(d).enumerate() {
            *x = params.theta()[i] * h;
        }
        let s = (h / n as f64).sqrt();
        let mut chol = [0.0; MAX_DIM * MAX_DIM];
        let l = params.sigma_chol();
        for i in 0..d {
            for j in 0..=i {
                chol[i * MAX_DIM + j] = l[(i, j)] * s;
            }
        }
        Self {
            params,
            d,
            h,
            drift,
            chol,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn params(&self) -> &'a ModelParams {
        self.params
    }

    /// Unreflected increment `theta h + L g sqrt(h/n)`.
    pub fn increment<N: NormalSource + ?Sized>(&self, rng: &mut N, out: &mut [f64]) {
        let d = self.d;
        let mut g = [0.0; MAX_DIM];
        rng.fill_normal(&mut g[..d]);
        for i in 0..d {
            let mut x = self.drift[i];
            for j in 0..=i {
                x += self.chol[i * MAX_DIM + j] * g[j];
            }
            out[i] = x;
        }
    }

    /// Advances `z` by one reflected Euler step in place.
    pub fn step<N: NormalSource + ?Sized>(&self, z: &mut [f64], rng: &mut N) -> Result<(), ReflectError> {
        let d = self.d;
        let mut w = [0.0; MAX_DIM];
        self.increment(rng, &mut w[..d]);
        for i in 0..d {
            w[i] += z[i];
        }
        let mut dy = [0.0; MAX_DIM];
        self.params.reflector().reflect_into(&w[..d], &mut z[..d], &mut dy[..d])
    }
}

/// One unreflected increment of the scaled driver.
pub fn gaussian_step<N: NormalSource + ?Sized>(params: &ModelParams, h: f64, n: u32, rng: &mut N) -> Vec<f64> {
    let mut out = vec![0.0; params.dim()];
    Stepper::new(params, h, n).increment(rng, &mut out);
    out
}

/// Simulates from `scenario.start` until the path enters `A_n` or `B`, or
/// until `max_steps` steps have been taken.
pub fn run_until_stop<N: NormalSource + ?Sized>(
    scenario: &Scenario,
    params: &ModelParams,
    cfg: &SimConfig,
    rng: &mut N,
) -> Result<PathOutcome, SimError> {
    let stepper = Stepper::new(params, cfg.h, scenario.n);
    let d = params.dim();
    let mut z = [0.0; MAX_DIM];
    z[..d].copy_from_slice(&scenario.start);
    let a = scenario.a_level();
    let b = scenario.b_level();
    let mut steps = 0u64;
    let hit = loop {
        if steps == cfg.max_steps {
            break Hit::Timeout;
        }
        stepper.step(&mut z[..d], rng)?;
        steps += 1;
        let s = l1_sum(&z[..d]);
        if s <= a {
            break Hit::A;
        }
        if s >= b {
            break Hit::B;
        }
    };
    Ok(PathOutcome {
        hit,
        exit_point: z[..d].to_vec(),
        steps,
        elapsed: steps as f64 * cfg.h,
    })
}

/// Simulates from `start` until `stop` holds. The predicate is evaluated at
/// the start and after every reflected step.
pub fn run_segment<N, F>(
    start: &[f64],
    params: &ModelParams,
    cfg: &SimConfig,
    n: u32,
    mut stop: F,
    rng: &mut N,
) -> Result<Segment, SimError>
where
    N: NormalSource + ?Sized,
    F: FnMut(&[f64]) -> bool,
{
    let stepper = Stepper::new(params, cfg.h, n);
    let d = params.dim();
    let mut z = [0.0; MAX_DIM];
    z[..d].copy_from_slice(start);
    let mut steps = 0u64;
    while !stop(&z[..d]) {
        if steps == cfg.max_steps {
            return Err(SimError::Timeout(steps));
        }
        stepper.step(&mut z[..d], rng)?;
        steps += 1;
    }
    Ok(Segment {
        position: z[..d].to_vec(),
        steps,
        elapsed: steps as f64 * cfg.h,
    })
}
