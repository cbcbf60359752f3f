//! Standard Monte Carlo, fixed-factor splitting and RESTART estimators.
//!
//! Replications run in parallel on the current rayon pool. Replication `k`
//! draws from its own stream of the master seed and results are reduced in
//! replication order, so the thread count never changes the output.

mod dynamics;
mod mc;
mod restart;
mod splitting;
mod stats;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dynamics::{Dynamics, SrbmDynamics, SrbmState, Status};
pub use mc::{crude_once, standard_mc};
pub use restart::{
    offspring_thresholds, region, restart_estimate, restart_once, restart_run, Crossing, RestartOutcome, RestartTrace,
};
pub use splitting::{split_level, split_run, splitting_estimate, splitting_once, SplitOutcome, SplitTrace};
pub use stats::{clamp_probability, decay_rate, statistics, Moments, Summary};

use crate::error::{EstimatorError, SimError};
use crate::simulate::replication_rng;

pub const DEFAULT_PARTICLE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Mc,
    Split,
    Restart,
}

impl Algorithm {
    pub const NAMES: [&'static str; 3] = ["mc", "split", "restart"];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mc => "mc",
            Algorithm::Split => "split",
            Algorithm::Restart => "restart",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mc" => Ok(Algorithm::Mc),
            "split" => Ok(Algorithm::Split),
            "restart" => Ok(Algorithm::Restart),
            other => Err(format!(
                "unknown algorithm `{other}`, expected one of mc, split, restart"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub split_r: u32,
    pub delta: f64,
    pub replications: u64,
    /// Largest number of live particles in one replication.
    pub particle_cap: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            split_r: 2,
            delta: 1.0,
            replications: 1000,
            particle_cap: DEFAULT_PARTICLE_CAP,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.split_r < 2 {
            return Err(EstimatorError::InvalidConfig("split_r must be at least 2".into()));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(EstimatorError::InvalidConfig("delta must lie in (0, 1]".into()));
        }
        if self.replications == 0 {
            return Err(EstimatorError::InvalidConfig("replications must be at least 1".into()));
        }
        if self.particle_cap == 0 {
            return Err(EstimatorError::InvalidConfig("particle_cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// What one replication produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplicationResult {
    Value {
        value: f64,
        particles: u64,
    },
    /// Counted as a zero sample.
    Timeout,
    /// Particle cap exceeded; excluded from the sample.
    Invalid,
}

impl ReplicationResult {
    /// Sorts an engine result into a replication outcome; errors other than
    /// timeouts and the particle cap are passed through.
    pub fn classify(res: Result<(f64, u64), EstimatorError>) -> Result<Self, EstimatorError> {
        match res {
            Ok((value, particles)) => Ok(Self::Value { value, particles }),
            Err(EstimatorError::Sim(SimError::Timeout(_))) => Ok(Self::Timeout),
            Err(EstimatorError::ParticleCapExceeded(_)) => Ok(Self::Invalid),
            Err(e) => Err(e),
        }
    }
}

/// Runs `f` once per replication with that replication's generator and
/// returns the results in replication order.
pub fn fan_out<T, F>(reps: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|k| f(&mut replication_rng(seed, k)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub algorithm: Algorithm,
    pub n: u32,
    pub estimate: f64,
    /// `None` with fewer than two valid replications.
    pub std_error: Option<f64>,
    /// 95% interval clamped to `[0, 1]`.
    pub ci95: [f64; 2],
    /// Replications in the sample (timeouts included, invalid ones not).
    pub replications: u64,
    pub timeouts: u64,
    /// Replications discarded for exceeding the particle cap.
    pub invalid: u64,
    pub particles_mean: f64,
    pub particles_std: f64,
    pub particles_max: u64,
    pub wall_time: f64,
    /// `-log(E[s^2]) / n`.
    pub rel_variance_rate: Option<f64>,
}

impl EstimateReport {
    pub fn from_replications(
        algorithm: Algorithm,
        n: u32,
        results: &[ReplicationResult],
        wall_time: f64,
    ) -> Result<Self, EstimatorError> {
        let mut values = Moments::default();
        let mut parts = Moments::default();
        let (mut timeouts, mut invalid) = (0, 0);
        for r in results {
            match *r {
                ReplicationResult::Value { value, particles } => {
                    values.push(value);
                    parts.push(particles as f64);
                }
                ReplicationResult::Timeout => {
                    timeouts += 1;
                    values.push(0.0);
                }
                ReplicationResult::Invalid => invalid += 1,
            }
        }
        if values.count() == 0 {
            return Err(EstimatorError::InsufficientSamples);
        }
        let estimate = values.mean();
        let (std_error, ci95) = match values.summary() {
            Ok(s) => {
                let ci = clamp_probability(s.ci95);
                (Some(s.std_error), [ci[0].min(estimate), ci[1].max(estimate)])
            }
            Err(_) => (None, [estimate, estimate]),
        };
        let m2 = values.second_moment();
        Ok(Self {
            algorithm,
            n,
            estimate,
            std_error,
            ci95,
            replications: values.count(),
            timeouts,
            invalid,
            particles_mean: parts.mean(),
            particles_std: parts.std_dev().unwrap_or(0.0),
            particles_max: parts.max() as u64,
            wall_time,
            rel_variance_rate: (m2 > 0.0).then(|| -m2.ln() / n as f64),
        })
    }

    /// Whether the 95% interval intersects `[lo, hi]`.
    pub fn ci_overlaps(&self, lo: f64, hi: f64) -> bool {
        self.ci95[0] <= hi && lo <= self.ci95[1]
    }

    /// `|a - b| / sqrt(se_a^2 + se_b^2)`.
    pub fn combined_z(&self, other: &EstimateReport) -> f64 {
        let se = (self.std_error.unwrap_or(0.0).powi(2) + other.std_error.unwrap_or(0.0).powi(2)).sqrt();
        let diff = (self.estimate - other.estimate).abs();
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Symmetric walk on `0..=m` started at `x`; hits `m` before `0` with
    /// probability `x / m`.
    struct Walk {
        m: i64,
    }

    impl Dynamics for Walk {
        type State = i64;
        fn step<R: Rng + ?Sized>(&self, s: &mut i64, rng: &mut R) -> Result<(), SimError> {
            *s += if rng.random::<bool>() { 1 } else { -1 };
            Ok(())
        }
        fn status(&self, s: &i64) -> Status {
            if *s >= self.m {
                Status::Target
            } else if *s <= 0 {
                Status::Absorbed
            } else {
                Status::Running
            }
        }
        fn potential(&self, s: &i64) -> f64 {
            (self.m - s) as f64 / self.m as f64
        }
        fn scale(&self) -> f64 {
            4.0
        }
    }

    #[test]
    fn report_from_values() {
        let res = [
            ReplicationResult::Value {
                value: 0.0,
                particles: 3,
            },
            ReplicationResult::Value {
                value: 1.0,
                particles: 5,
            },
            ReplicationResult::Timeout,
            ReplicationResult::Invalid,
            ReplicationResult::Value {
                value: 1.0,
                particles: 10,
            },
        ];
        let rep = EstimateReport::from_replications(Algorithm::Split, 3, &res, 0.0).unwrap();
        assert_eq!(rep.replications, 4);
        assert_eq!(rep.timeouts, 1);
        assert_eq!(rep.invalid, 1);
        assert_eq!(rep.estimate, 0.5);
        assert_eq!(rep.particles_max, 10);
        assert_eq!(rep.particles_mean, 6.0);
        assert!(rep.ci95[0] <= rep.estimate && rep.estimate <= rep.ci95[1]);
        assert!(rep.ci95[0] >= 0.0 && rep.ci95[1] <= 1.0);
    }

    #[test]
    fn single_replication_has_no_error_bar() {
        let res = [ReplicationResult::Value {
            value: 0.25,
            particles: 1,
        }];
        let rep = EstimateReport::from_replications(Algorithm::Split, 3, &res, 0.0).unwrap();
        assert_eq!(rep.std_error, None);
        assert_eq!(rep.ci95, [0.25, 0.25]);
    }

    #[test]
    fn fan_out_is_ordered_and_thread_independent() {
        let f = |rng: &mut ChaCha8Rng| rng.random::<u64>();
        let a = fan_out(64, 7, f);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| fan_out(64, 7, f));
        assert_eq!(a, b);
        assert_eq!(a[5], replication_rng(7, 5).random::<u64>());
    }

    #[test]
    fn splitting_walk_start_in_target() {
        let cfg = SplitConfig::default();
        let out = split_run(&Walk { m: 8 }, &8, &cfg, 1000, &mut replication_rng(1, 0), None).unwrap();
        assert_eq!(out.estimate, 1.0);
        assert_eq!(out.particles, 1);
    }

    #[test]
    fn restart_offspring_rule() {
        assert_eq!(offspring_thresholds(2, 0, 2).unwrap(), vec![(1, 1), (2, 2)]);
        assert_eq!(offspring_thresholds(3, 0, 2).unwrap(), vec![(1, 2), (2, 6)]);
        assert_eq!(offspring_thresholds(2, 3, 3).unwrap(), vec![]);
    }

    #[test]
    fn walk_estimators_are_unbiased() {
        let walk = Walk { m: 8 };
        let cfg = SplitConfig::default();
        let reps = 20_000;
        let split = fan_out(reps, 11, |rng| {
            split_run(&walk, &1, &cfg, 100_000, rng, None).unwrap().estimate
        });
        let rs = fan_out(reps, 12, |rng| {
            restart_run(&walk, &1, &cfg, 100_000, rng, None).unwrap().estimate
        });
        for samples in [split, rs] {
            let s = statistics(&samples).unwrap();
            assert!((s.mean - 0.125).abs() < 4.0 * s.std_error, "{s:?}");
        }
    }
}
