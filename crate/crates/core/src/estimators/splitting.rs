use std::time::Instant;

use rand::Rng;

use super::dynamics::{Dynamics, SrbmDynamics, Status};
use super::{fan_out, Algorithm, EstimateReport, ReplicationResult, SplitConfig};
use crate::error::{EstimatorError, SimError};
use crate::model::{ModelParams, Scenario};
use crate::simulate::SimConfig;
use crate::subsolution::{level_from_value, Subsolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOutcome {
    /// `s_n = r^{-l0} N_{l0}`.
    pub estimate: f64,
    /// Particles simulated (generations `0..l0`).
    pub particles: u64,
    pub start_level: u32,
    /// Particles that reached `B`, counted with their final multiplicity.
    pub arrivals: u64,
}

/// Per-generation accounting of one splitting run. Index `i` refers to
/// generation `i`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitTrace {
    /// Particles simulated in generation `i`.
    pub simulated: Vec<u64>,
    /// Particles of generation `i` that entered their target level.
    pub entered: Vec<u64>,
    /// Offspring created from generation `i` entrants.
    pub spawned: Vec<u64>,
}

impl SplitTrace {
    fn bump(v: &mut Vec<u64>, i: usize, by: u64) {
        if v.len() <= i {
            v.resize(i + 1, 0);
        }
        v[i] += by;
    }
}

/// Level of a state for fixed-factor splitting: 0 on the target, otherwise
/// `1 + ceil(n V / delta)` with `V = delta U / log r`.
pub fn split_level<D: Dynamics>(dynamics: &D, s: &D::State, cfg: &SplitConfig) -> u32 {
    if dynamics.status(s) == Status::Target {
        return 0;
    }
    let v = cfg.delta * dynamics.potential(s) / (cfg.split_r as f64).ln();
    level_from_value(v, cfg.delta, dynamics.scale())
}

/// One replication of fixed-factor splitting on an arbitrary process.
///
/// A generation-`i` particle runs until it is absorbed or enters level
/// `l0 - i - 1`; entrants split into `split_r` copies at the entry state.
/// Particles are processed depth-first.
pub fn split_run<D: Dynamics, R: Rng + ?Sized>(
    dynamics: &D,
    start: &D::State,
    cfg: &SplitConfig,
    max_steps: u64,
    rng: &mut R,
    mut trace: Option<&mut SplitTrace>,
) -> Result<SplitOutcome, EstimatorError> {
    let r = cfg.split_r as u64;
    let l0 = split_level(dynamics, start, cfg);
    if l0 == 0 {
        return Ok(SplitOutcome {
            estimate: 1.0,
            particles: 1,
            start_level: 0,
            arrivals: 1,
        });
    }
    let mut stack = vec![(start.clone(), 0u32)];
    let mut particles = 0u64;
    let mut arrivals = 0u64;
    while let Some((mut s, gen)) = stack.pop() {
        particles += 1;
        if let Some(t) = trace.as_deref_mut() {
            SplitTrace::bump(&mut t.simulated, gen as usize, 1);
        }
        let target = l0 - gen - 1;
        let mut steps = 0u64;
        let entered = loop {
            if dynamics.status(&s) == Status::Absorbed {
                break false;
            }
            if split_level(dynamics, &s, cfg) <= target {
                break true;
            }
            if steps == max_steps {
                return Err(SimError::Timeout(steps).into());
            }
            dynamics.step(&mut s, rng)?;
            steps += 1;
        };
        if !entered {
            continue;
        }
        if let Some(t) = trace.as_deref_mut() {
            SplitTrace::bump(&mut t.entered, gen as usize, 1);
            SplitTrace::bump(&mut t.spawned, gen as usize, r);
        }
        if gen + 1 == l0 {
            arrivals += r;
        } else {
            if stack.len() + r as usize > cfg.particle_cap {
                return Err(EstimatorError::ParticleCapExceeded(cfg.particle_cap));
            }
            for _ in 0..r {
                stack.push((s.clone(), gen + 1));
            }
        }
    }
    Ok(SplitOutcome {
        estimate: arrivals as f64 * (r as f64).powi(-(l0 as i32)),
        particles,
        start_level: l0,
        arrivals,
    })
}

/// One splitting replication for the SRBM.
pub fn splitting_once<R: Rng + ?Sized>(
    scenario: &Scenario,
    params: &ModelParams,
    sim: &SimConfig,
    cfg: &SplitConfig,
    sub: &Subsolution,
    rng: &mut R,
    trace: Option<&mut SplitTrace>,
) -> Result<SplitOutcome, EstimatorError> {
    let dynamics = SrbmDynamics::new(scenario, params, sim.h, sub);
    split_run(&dynamics, &dynamics.start(), cfg, sim.max_steps, rng, trace)
}

/// Averages `cfg.replications` independent splitting replications.
pub fn splitting_estimate(
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
            split_run(&dynamics, &start, cfg, sim.max_steps, rng, None).map(|o| (o.estimate, o.particles)),
        )
    });
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    EstimateReport::from_replications(Algorithm::Split, scenario.n, &results, t0.elapsed().as_secs_f64())
}
