//! Rare-event estimation for semimartingale reflecting Brownian motion (SRBM)
//! in the nonnegative orthant.
//!
//! The quantity of interest is the probability that the scaled process
//! `Z_n(t) = Z(nt)/n`, started at `z_n`, reaches the far boundary
//! `B = {sum z >= 1}` before the small corner set `A_n = {sum z <= eps/n}`.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: problem data `(theta, Sigma, R)` and the experiment scenario.
//! * [`skorokhod`]: one-step orthant reflection (an LCP) and path regulation.
//! * [`simulate`]: Euler simulation of the scaled, discretized SRBM.
//! * [`varprob`]: the large-deviations variational problem: the explicit
//!   two-dimensional solution and face-constrained local costs in any dimension.
//! * [`subsolution`]: subsolutions built from the variational problem, the
//!   importance function and level indexing.
//! * [`estimators`]: standard Monte Carlo, fixed-factor splitting and RESTART.
//! * [`experiment`]: JSON run configs, the run driver and JSON/CSV output.

pub mod error;
pub mod estimators;
pub mod experiment;
pub mod model;
pub mod simulate;
pub mod skorokhod;
pub mod subsolution;
pub mod varprob;

pub use error::Error;
pub use estimators::{EstimateReport, SplitConfig};
pub use model::{ModelParams, Scenario};
pub use simulate::{Hit, PathOutcome, SimConfig};
pub use subsolution::{Subsolution, SubsolutionKind};

/// Largest state dimension supported. The completely-S test and the
/// brute-force reflection oracle enumerate subsets of the coordinates.
pub const MAX_DIM: usize = 8;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
