//! JSON run configuration.
//!
//! ```json
//! {
//!   "model": { "theta": [-2, 1], "sigma": [[1, 0], [0, 1]],
//!              "refl": [[1, 0], [-1, 1]], "m_matrix": false },
//!   "scenario": { "epsilon": 0.15, "start": [0.1, 0.1],
//!                 "start_units": "unscaled", "n": [5, 10] },
//!   "algorithm": { "name": "split", "split_r": 2, "delta": 1.0,
//!                  "replications": 1000,
//!                  "step": { "rule": "inverse_n", "c": 1000 },
//!                  "max_steps": 100000000, "particle_cap": 1000000 },
//!   "subsolution": { "kind": "exact2d" },
//!   "seed": 2024,
//!   "record_timing": true,
//!   "output": { "path": "out.csv", "format": "csv" }
//! }
//! ```
//!
//! Matrices are row-major nested arrays. Everything in `algorithm` except
//! `name` and `replications` has a default, as do `subsolution`,
//! `record_timing` and `output`. With `"start_units": "unscaled"` the
//! scaled process starts from `start / n`; the default `"scaled"` uses
//! `start` as is for every `n`.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::estimators::{Algorithm, SplitConfig, DEFAULT_PARTICLE_CAP};
use crate::model::{ModelParams, Scenario};
use crate::simulate::DEFAULT_MAX_STEPS;
use crate::subsolution::SubsolutionKind;

pub const DEFAULT_RESOLUTION: usize = 24;
pub const DEFAULT_REFINE_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub theta: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub refl: Vec<Vec<f64>>,
    pub m_matrix: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub epsilon: f64,
    pub start: Vec<f64>,
    /// How `start` relates to the scaled starting point `z_n`.
    pub start_units: StartUnits,
    pub n: Vec<u32>,
}

/// `Scaled`: `start` is `z_n` itself, the same for every `n`.
/// `Unscaled`: `start` is a point `z` of the unscaled process and
/// `z_n = z / n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartUnits {
    #[default]
    Scaled,
    Unscaled,
}

impl ScenarioConfig {
    /// Starting point of the scaled process for scale `n`.
    pub fn start_for(&self, n: u32) -> Vec<f64> {
        match self.start_units {
            StartUnits::Scaled => self.start.clone(),
            StartUnits::Unscaled => self.start.iter().map(|x| x / n as f64).collect(),
        }
    }

    pub fn scenario(&self, n: u32) -> Result<Scenario, crate::error::ModelError> {
        Scenario::new(n, self.epsilon, self.start_for(n))
    }
}

/// Step size as a function of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepRule {
    /// `h = 1 / (c n)`.
    InverseN {
        c: f64,
    },
    Fixed {
        h: f64,
    },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::InverseN { c: 1000.0 }
    }
}

impl StepRule {
    pub fn step(&self, n: u32) -> f64 {
        match *self {
            StepRule::InverseN { c } => 1.0 / (c * n as f64),
            StepRule::Fixed { h } => h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub name: Algorithm,
    pub split_r: u32,
    pub delta: f64,
    pub replications: u64,
    pub step: StepRule,
    pub max_steps: u64,
    pub particle_cap: usize,
}

impl AlgorithmConfig {
    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            split_r: self.split_r,
            delta: self.delta,
            replications: self.replications,
            particle_cap: self.particle_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionConfig {
    /// `None` picks the exact solution in two dimensions and the scaled-L1
    /// subsolution otherwise.
    pub kind: Option<SubsolutionKind>,
    /// Scaling factor for the scaled-L1 subsolution; computed when absent.
    pub r: Option<f64>,
    pub resolution: usize,
    pub refine_iters: usize,
}

impl Default for SubsolutionConfig {
    fn default() -> Self {
        Self {
            kind: None,
            r: None,
            resolution: DEFAULT_RESOLUTION,
            refine_iters: DEFAULT_REFINE_ITERS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format `{other}`, expected json or csv")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub path: String,
    pub format: OutputFormat,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub scenario: ScenarioConfig,
    pub algorithm: AlgorithmConfig,
    pub subsolution: SubsolutionConfig,
    pub seed: u64,
    /// Record wall-clock times. Turn off for byte-reproducible manifests.
    pub record_timing: bool,
    pub output: Option<OutputConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<RawModel>,
    scenario: Option<RawScenario>,
    algorithm: Option<RawAlgorithm>,
    subsolution: Option<RawSubsolution>,
    seed: Option<u64>,
    record_timing: Option<bool>,
    output: Option<OutputConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    theta: Option<Vec<f64>>,
    sigma: Option<Vec<Vec<f64>>>,
    refl: Option<Vec<Vec<f64>>>,
    m_matrix: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    epsilon: Option<f64>,
    start: Option<Vec<f64>>,
    start_units: Option<StartUnits>,
    n: Option<Vec<u32>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgorithm {
    name: Option<Algorithm>,
    split_r: Option<u32>,
    delta: Option<f64>,
    replications: Option<u64>,
    step: Option<StepRule>,
    max_steps: Option<u64>,
    particle_cap: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubsolution {
    kind: Option<SubsolutionKind>,
    r: Option<f64>,
    resolution: Option<usize>,
    refine_iters: Option<usize>,
}

fn missing(field: &str) -> ConfigError {
    invalid(field, "missing required field")
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a JSON run configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let model = raw.model.ok_or_else(|| missing("model"))?;
    let model = ModelConfig {
        theta: model.theta.ok_or_else(|| missing("model.theta"))?,
        sigma: model.sigma.ok_or_else(|| missing("model.sigma"))?,
        refl: model.refl.ok_or_else(|| missing("model.refl"))?,
        m_matrix: model.m_matrix.unwrap_or(false),
    };
    let scenario = raw.scenario.ok_or_else(|| missing("scenario"))?;
    let scenario = ScenarioConfig {
        epsilon: scenario.epsilon.ok_or_else(|| missing("scenario.epsilon"))?,
        start: scenario.start.ok_or_else(|| missing("scenario.start"))?,
        start_units: scenario.start_units.unwrap_or_default(),
        n: scenario.n.ok_or_else(|| missing("scenario.n"))?,
    };
    let alg = raw.algorithm.ok_or_else(|| missing("algorithm"))?;
    let algorithm = AlgorithmConfig {
        name: alg.name.ok_or_else(|| missing("algorithm.name"))?,
        split_r: alg.split_r.unwrap_or(2),
        delta: alg.delta.unwrap_or(1.0),
        replications: alg.replications.ok_or_else(|| missing("algorithm.replications"))?,
        step: alg.step.unwrap_or_default(),
        max_steps: alg.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
        particle_cap: alg.particle_cap.unwrap_or(DEFAULT_PARTICLE_CAP),
    };
    let subsolution = match raw.subsolution {
        None => SubsolutionConfig::default(),
        Some(s) => SubsolutionConfig {
            kind: s.kind,
            r: s.r,
            resolution: s.resolution.unwrap_or(DEFAULT_RESOLUTION),
            refine_iters: s.refine_iters.unwrap_or(DEFAULT_REFINE_ITERS),
        },
    };
    let cfg = RunConfig {
        model,
        scenario,
        algorithm,
        subsolution,
        seed: raw.seed.ok_or_else(|| missing("seed"))?,
        record_timing: raw.record_timing.unwrap_or(true),
        output: raw.output,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks every block; model errors are reported against `model`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let params = self.params()?;
        if self.scenario.n.is_empty() {
            return Err(invalid("scenario.n", "list of n values is empty"));
        }
        if self.scenario.start.len() != params.dim() {
            return Err(invalid(
                "scenario.start",
                format!(
                    "expected {} coordinates, found {}",
                    params.dim(),
                    self.scenario.start.len()
                ),
            ));
        }
        for &n in &self.scenario.n {
            self.scenario
                .scenario(n)
                .map_err(|e| invalid("scenario", e.to_string()))?;
            let h = self.algorithm.step.step(n);
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid(
                    "algorithm.step",
                    format!("step size for n = {n} is not positive"),
                ));
            }
        }
        if self.algorithm.max_steps == 0 {
            return Err(invalid("algorithm.max_steps", "must be at least 1"));
        }
        self.algorithm
            .split_config()
            .validate()
            .map_err(|e| invalid("algorithm", e.to_string()))?;
        if let Some(r) = self.subsolution.r {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("subsolution.r", "must be positive"));
            }
        }
        if self.subsolution.kind == Some(SubsolutionKind::Exact2D) && params.dim() != 2 {
            return Err(invalid(
                "subsolution.kind",
                "the exact subsolution needs a two-dimensional model",
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        ModelParams::from_rows(
            &self.model.theta,
            &self.model.sigma,
            &self.model.refl,
            self.model.m_matrix,
        )
        .map_err(|e| invalid("model", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
