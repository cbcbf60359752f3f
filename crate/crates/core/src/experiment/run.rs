use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{ConfigError, Error, VpError};
use crate::estimators::{restart_estimate, splitting_estimate, standard_mc, Algorithm, EstimateReport};
use crate::model::ModelParams;
use crate::simulate::SimConfig;
use crate::subsolution::{Subsolution, SubsolutionKind, SubsolutionSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NResult {
    pub n: u32,
    pub seed: u64,
    pub h: f64,
    pub report: Option<EstimateReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: RunConfig,
    pub subsolution: Option<SubsolutionSummary>,
    pub results: Vec<NResult>,
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
}

/// Seed used for the estimator at scale `n`.
pub fn seed_for(master: u64, n: u32) -> u64 {
    master ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Builds the subsolution requested by `cfg`: the exact solution in two
/// dimensions unless overridden, the scaled-L1 subsolution otherwise.
pub fn build_subsolution(cfg: &RunConfig, params: &ModelParams) -> Result<Subsolution, VpError> {
    let kind = cfg.subsolution.kind.unwrap_or(if params.dim() == 2 {
        SubsolutionKind::Exact2D
    } else {
        SubsolutionKind::ScaledL1
    });
    match kind {
        SubsolutionKind::Exact2D => Subsolution::exact_2d(params),
        SubsolutionKind::ScaledL1 => match cfg.subsolution.r {
            Some(r) => Ok(Subsolution::scaled_l1(r)),
            None => Subsolution::scaled_l1_for(params, cfg.subsolution.resolution, cfg.subsolution.refine_iters),
        },
    }
}

/// Runs the configured estimator for every `n`. Model and subsolution errors
/// abort the run; estimator errors are recorded against their `n`.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunManifest, Error> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| ConfigError::Validation {
        field: "threads".into(),
        message: e.to_string(),
    })?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &RunConfig) -> Result<RunManifest, Error> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let t0 = Instant::now();
    let params = cfg.params()?;
    let alg = &cfg.algorithm;
    let sub = match alg.name {
        Algorithm::Mc => None,
        _ => Some(build_subsolution(cfg, &params)?),
    };
    let split = alg.split_config();
    let mut results = Vec::new();
    for &n in &cfg.scenario.n {
        let seed = seed_for(cfg.seed, n);
        let h = alg.step.step(n);
        let outcome = (|| -> Result<EstimateReport, Error> {
            let scenario = cfg.scenario.scenario(n)?;
            let sim = SimConfig::new(h, alg.max_steps, seed)?;
            let report = match (alg.name, &sub) {
                (Algorithm::Split, Some(sub)) => splitting_estimate(&scenario, &params, &sim, &split, sub)?,
                (Algorithm::Restart, Some(sub)) => restart_estimate(&scenario, &params, &sim, &split, sub)?,
                _ => standard_mc(&scenario, &params, &sim, alg.replications)?,
            };
            Ok(report)
        })();
        let (report, error) = match outcome {
            Ok(mut r) => {
                if !cfg.record_timing {
                    r.wall_time = 0.0;
                }
                (Some(r), None)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        results.push(NResult {
            n,
            seed,
            h,
            report,
            error,
        });
    }
    Ok(RunManifest {
        version: crate::VERSION.to_string(),
        config: cfg.clone(),
        subsolution: sub.as_ref().map(|s| s.summary()),
        results,
        timing: cfg.record_timing.then(|| Timing {
            started_unix: started,
            total_seconds: t0.elapsed().as_secs_f64(),
        }),
    })
}
