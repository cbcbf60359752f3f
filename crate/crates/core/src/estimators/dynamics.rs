//! Abstraction over the simulated process so the branching engines can be
//! driven by the SRBM or by small test processes with known answers.

use rand::Rng;

use crate::error::SimError;
use crate::model::{l1_sum, ModelParams, Scenario};
use crate::simulate::Stepper;
use crate::subsolution::Subsolution;
use crate::MAX_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Running,
    /// Reached the rare set `B`.
    Target,
    /// Reached the absorbing set `A_n`.
    Absorbed,
}

pub trait Dynamics: Sync {
    type State: Clone + Send;

    fn step<R: Rng + ?Sized>(&self, s: &mut Self::State, rng: &mut R) -> Result<(), SimError>;

    fn status(&self, s: &Self::State) -> Status;

    /// Subsolution value `U(s)`. Levels and RESTART regions are derived from
    /// it; larger values are farther from the target.
    fn potential(&self, s: &Self::State) -> f64;

    /// Large-deviations scaling `n`.
    fn scale(&self) -> f64;
}

/// Fixed-size SRBM state; only the first `d` coordinates are used.
pub type SrbmState = [f64; MAX_DIM];

/// The scaled Euler-discretized SRBM stopped on `A_n ∪ B`.
#[derive(Debug, Clone)]
pub struct SrbmDynamics<'a> {
    stepper: Stepper<'a>,
    scenario: &'a Scenario,
    sub: &'a Subsolution,
    d: usize,
}

impl<'a> SrbmDynamics<'a> {
    pub fn new(scenario: &'a Scenario, params: &'a ModelParams, h: f64, sub: &'a Subsolution) -> Self {
        Self {
            stepper: Stepper::new(params, h, scenario.n),
            scenario,
            sub,
            d: params.dim(),
        }
    }

    pub fn start(&self) -> SrbmState {
        let mut s = [0.0; MAX_DIM];
        s[..self.d].copy_from_slice(&self.scenario.start);
        s
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

impl Dynamics for SrbmDynamics<'_> {
    type State = SrbmState;

    fn step<R: Rng + ?Sized>(&self, s: &mut SrbmState, rng: &mut R) -> Result<(), SimError> {
        self.stepper.step(&mut s[..self.d], rng)?;
        Ok(())
    }

    fn status(&self, s: &SrbmState) -> Status {
        let t = l1_sum(&s[..self.d]);
        if t <= self.scenario.a_level() {
            Status::Absorbed
        } else if t >= self.scenario.b_level() {
            Status::Target
        } else {
            Status::Running
        }
    }

    fn potential(&self, s: &SrbmState) -> f64 {
        self.sub.tbar(&s[..self.d])
    }

    fn scale(&self) -> f64 {
        self.scenario.n as f64
    }
}
