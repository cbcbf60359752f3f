use std::time::Instant;

use rand::Rng;

use super::dynamics::{Dynamics, SrbmDynamics, Status};
use super::{fan_out, Algorithm, EstimateReport, ReplicationResult, SplitConfig};
use crate::error::{EstimatorError, SimError};
use crate::model::{ModelParams, Scenario};
use crate::simulate::SimConfig;
use crate::subsolution::Subsolution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartOutcome {
    /// Sum of `r^{-k}` over target arrivals in region `k`.
    pub estimate: f64,
    /// Particles ever created, the start particle included.
    pub particles: u64,
    pub arrivals: u64,
    pub killed: u64,
}

/// One upward region crossing and the thresholds given to its offspring.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub from: u32,
    pub to: u32,
    /// `(threshold, offspring count)` for each threshold in `from+1..=to`.
    pub thresholds: Vec<(u32, u64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RestartTrace {
    pub crossings: Vec<Crossing>,
}

/// RESTART region of a state relative to the start potential `u0`:
/// `max(0, floor(n (u0 - U) / log r))`.
pub fn region<D: Dynamics>(dynamics: &D, u0: f64, s: &D::State, log_r: f64) -> u32 {
    let x = (dynamics.scale() * (u0 - dynamics.potential(s)) / log_r).floor();
    if x <= 0.0 {
        0
    } else {
        x.min(u32::MAX as f64) as u32
    }
}

/// Offspring counts per threshold for a crossing `j -> k`:
/// `(r - 1) r^(alpha - j - 1)` for `alpha` in `j+1..=k`.
pub fn offspring_thresholds(r: u64, j: u32, k: u32) -> Option<Vec<(u32, u64)>> {
    (j + 1..=k)
        .map(|alpha| {
            r.checked_pow(alpha - j - 1)
                .and_then(|p| p.checked_mul(r - 1))
                .map(|c| (alpha, c))
        })
        .collect()
}

/// One RESTART replication on an arbitrary process.
///
/// A particle jumping from region `j` to `k > j` in one step spawns
/// `r^(k-j) - 1` copies with killing thresholds in `j+1..=k`; a particle
/// entering a region below its threshold is killed. A target arrival in
/// region `k` contributes `r^{-k}`.
pub fn restart_run<D: Dynamics, R: Rng + ?Sized>(
    dynamics: &D,
    start: &D::State,
    cfg: &SplitConfig,
    max_steps: u64,
    rng: &mut R,
    mut trace: Option<&mut RestartTrace>,
) -> Result<RestartOutcome, EstimatorError> {
    let r = cfg.split_r as u64;
    let log_r = (r as f64).ln();
    let u0 = dynamics.potential(start);
    let mut out = RestartOutcome {
        estimate: 0.0,
        particles: 1,
        arrivals: 0,
        killed: 0,
    };
    match dynamics.status(start) {
        Status::Target => {
            out.estimate = 1.0;
            out.arrivals = 1;
            return Ok(out);
        }
        Status::Absorbed => return Ok(out),
        Status::Running => {}
    }
    let weight = |k: u32| (r as f64).powi(-(k as i32));
    let cap = cfg.particle_cap;
    let mut stack = vec![(start.clone(), 0u32, 0u32)];
    while let Some((mut s, threshold, mut j)) = stack.pop() {
        let mut steps = 0u64;
        loop {
            if steps == max_steps {
                return Err(SimError::Timeout(steps).into());
            }
            dynamics.step(&mut s, rng)?;
            steps += 1;
            let k = region(dynamics, u0, &s, log_r);
            if k < threshold {
                out.killed += 1;
                break;
            }
            let status = dynamics.status(&s);
            if k > j {
                let counts = offspring_thresholds(r, j, k).ok_or(EstimatorError::ParticleCapExceeded(cap))?;
                let total: u64 = counts.iter().map(|c| c.1).sum();
                if let Some(t) = trace.as_deref_mut() {
                    t.crossings.push(Crossing {
                        from: j,
                        to: k,
                        thresholds: counts.clone(),
                    });
                }
                out.particles += total;
                match status {
                    // offspring created at a stopping state stop with it
                    Status::Target => {
                        out.arrivals += total + 1;
                        out.estimate += (total + 1) as f64 * weight(k);
                        break;
                    }
                    Status::Absorbed => break,
                    Status::Running => {
                        if stack.len() as u64 + total > cap as u64 {
                            return Err(EstimatorError::ParticleCapExceeded(cap));
                        }
                        for &(alpha, c) in &counts {
                            for _ in 0..c {
                                stack.push((s.clone(), alpha, k));
                            }
                        }
                    }
                }
            }
            j = k;
            match status {
                Status::Target => {
                    out.arrivals += 1;
                    out.estimate += weight(k);
                    break;
                }
                Status::Absorbed => break,
                Status::Running => {}
            }
        }
    }
    Ok(out)
}

/// One RESTART replication for the SRBM.
pub fn restart_once<R: Rng + ?Sized>(
    scenario: &Scenario,
    params: &ModelParams,
    sim: &SimConfig,
    cfg: &SplitConfig,
    sub: &Subsolution,
    rng: &mut R,
    trace: Option<&mut RestartTrace>,
) -> Result<RestartOutcome, EstimatorError> {
    let dynamics = SrbmDynamics::new(scenario, params, sim.h, sub);
    restart_run(&dynamics, &dynamics.start(), cfg, sim.max_steps, rng, trace)
}

/// Averages `cfg.replications` independent RESTART replications.
pub fn restart_estimate(
    scenario: &Scenario,
    params: &ModelParams,
    sim: &SimConfig,
    cfg: &SplitConfig,
    sub: &Subsolution,
) -> Result<EstimateReport, EstimatorError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let dynamics = SrbmDynamics::new(scenario, params, sim.h, sub);
    let start = dynamics.start();
    let results = fan_out(cfg.replications, sim.rng_seed, |rng| {
        ReplicationResult::classify(
            restart_run(&dynamics, &start, cfg, sim.max_steps, rng, None).map(|o| (o.estimate, o.particles)),
        )
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    EstimateReport::from_replications(Algorithm::Restart, scenario.n, &results, t0.elapsed().as_secs_f64())
}
