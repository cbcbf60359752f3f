use std::time::Instant;

use rand::Rng;

use super::dynamics::{Dynamics, Status};
use super::{fan_out, Algorithm, EstimateReport, ReplicationResult};
use crate::error::{EstimatorError, SimError};
use crate::model::{ModelParams, Scenario};
use crate::simulate::{run_until_stop, Hit, SimConfig};

/// Runs one path of `dynamics` to absorption or the target. Returns 1 for the
/// target and 0 for absorption.
pub fn crude_once<D: Dynamics, R: Rng + ?Sized>(
    dynamics: &D,
    start: &D::State,
    max_steps: u64,
    rng: &mut R,
) -> Result<f64, SimError> {
    let mut s = start.clone();
    let mut steps = 0u64;
    loop {
        match dynamics.status(&s) {
            Status::Target => return Ok(1.0),
            Status::Absorbed => return Ok(0.0),
            Status::Running => {}
        }
        if steps == max_steps {
            return Err(SimError::Timeout(steps));
        }
        dynamics.step(&mut s, rng)?;
        steps += 1;
    }
}

/// Standard Monte Carlo: the fraction of `reps` independent paths that reach
/// `B` before `A_n`. Timed-out paths count as misses and are tallied.
pub fn standard_mc(
    scenario: &Scenario,
    params: &ModelParams,
    sim: &SimConfig,
    reps: u64,
) -> Result<EstimateReport, EstimatorError> {
    if reps == 0 {
        return Err(EstimatorError::InvalidConfig("replications must be at least 1".into()));
    }
    let t0 = Instant::now();
    let results = fan_out(reps, sim.rng_seed, |rng| {
        run_until_stop(scenario, params, sim, rng).map(|o| match o.hit {
            Hit::B => ReplicationResult::Value {
                value: 1.0,
                particles: 1,
            },
            Hit::A => ReplicationResult::Value {
                value: 0.0,
                particles: 1,
            },
            Hit::Timeout => ReplicationResult::Timeout,
        })
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    EstimateReport::from_replications(Algorithm::Mc, scenario.n, &results, t0.elapsed().as_secs_f64())
}
