//! Subsolutions of the variational problem and the importance function built
//! from them.
//!
//! Two constructions are provided:
//!
//! * `Exact2D`: `T̄(v) = inf_B I - I(v)` from the explicit two-dimensional
//!   value function. It is tight at the origin.
//! * `ScaledL1`: `T̄(v) = (1 - |v|_1) / r`, where `r` is the largest ratio of
//!   `|u|_1` to the face-constrained local cost over all face directions `u`.
//!   It is valid in any dimension when `R` is an M-matrix and `theta < 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::VpError;
use crate::model::{l1_sum, mask_indices, ModelParams};
use crate::varprob::{infimum_over_b_2d, local_cost, local_cost_direction, solve_vp_2d, vp2d_cost, Vp2dSolution};

/// Ratios whose local cost falls below this are treated as degenerate.
const DEGENERATE_COST: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsolutionKind {
    #[serde(rename = "exact2d")]
    Exact2D,
    #[serde(rename = "scaled_l1")]
    ScaledL1,
}

#[derive(Debug, Clone)]
pub struct Subsolution {
    kind: SubsolutionKind,
    r: Option<f64>,
    vp2d: Option<Vp2dSolution>,
    inf_b: f64,
}

/// Serializable description of a subsolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionSummary {
    pub kind: SubsolutionKind,
    pub r: Option<f64>,
    pub inf_b: f64,
    pub tbar_origin: f64,
}

impl Subsolution {
    /// `T̄ = inf_B I - I` for a two-dimensional model.
    pub fn exact_2d(params: &ModelParams) -> Result<Self, VpError> {
        let sol = solve_vp_2d(params)?;
        let (inf_b, _) = infimum_over_b_2d(&sol);
        Ok(Self {
            kind: SubsolutionKind::Exact2D,
            r: None,
            vp2d: Some(sol),
            inf_b,
        })
    }

    /// `T̄(v) = (1 - |v|_1) / r` for a given scaling factor.
    pub fn scaled_l1(r: f64) -> Self {
        assert!(r > 0.0 && r.is_finite(), "scaling factor must be positive");
        Self {
            kind: SubsolutionKind::ScaledL1,
            r: Some(r),
            vp2d: None,
            inf_b: 1.0,
        }
    }

    /// Computes the scaling factor for `params` and builds the scaled-L1
    /// subsolution. Requires the M-matrix model class.
    pub fn scaled_l1_for(params: &ModelParams, resolution: usize, refine_iters: usize) -> Result<Self, VpError> {
        if !params.is_m_matrix() || params.theta().iter().any(|&t| t >= 0.0) {
            return Err(VpError::Unsupported(
                "the scaled-L1 subsolution needs an M-matrix R and a strictly negative drift".into(),
            ));
        }
        Ok(Self::scaled_l1(compute_scaling_r(params, resolution, refine_iters)?))
    }

    pub fn kind(&self) -> SubsolutionKind {
        self.kind
    }

    pub fn r(&self) -> Option<f64> {
        self.r
    }

    /// Infimum over `B` of the function the subsolution is built from.
    pub fn inf_b(&self) -> f64 {
        self.inf_b
    }

    pub fn vp2d(&self) -> Option<&Vp2dSolution> {
        self.vp2d.as_ref()
    }

    pub fn tbar(&self, v: &[f64]) -> f64 {
        match self.kind {
            SubsolutionKind::ScaledL1 => {
                let t: f64 = v.iter().map(|x| x.abs()).sum();
                (1.0 - t) / self.r.expect("scaled-L1 subsolution has r")
            }
            SubsolutionKind::Exact2D => {
                self.inf_b - vp2d_cost(self.vp2d.as_ref().expect("exact subsolution has its VP"), v)
            }
        }
    }

    pub fn summary(&self) -> SubsolutionSummary {
        let origin = match self.kind {
            SubsolutionKind::Exact2D => vec![0.0; 2],
            SubsolutionKind::ScaledL1 => vec![0.0],
        };
        SubsolutionSummary {
            kind: self.kind,
            r: self.r,
            inf_b: self.inf_b,
            tbar_origin: self.tbar(&origin),
        }
    }
}

pub fn tbar(sub: &Subsolution, v: &[f64]) -> f64 {
    sub.tbar(v)
}

/// Mesh over the direction set of face `K`: unit-L1 vectors vanishing on `K`
/// with at least one nonnegative free coordinate. Every sign pattern of the
/// free coordinates except the all-negative one contributes a simplex facet
/// meshed at `resolution`.
pub fn direction_grid(d: usize, k: &[usize], resolution: usize) -> Result<Vec<Vec<f64>>, VpError> {
    let free: Vec<usize> = (0..d).filter(|i| !k.contains(i)).collect();
    if free.is_empty() {
        return Err(VpError::EmptySet);
    }
    let m = free.len();
    let res = resolution.max(1);
    let mut out = Vec::new();
    let mut parts = vec![0usize; m];
    compositions(res, m, &mut parts, 0, &mut |parts| {
        for signs in 0u32..(1 << m) {
            // bit set = negative; skip the all-negative facet
            if signs == (1 << m) - 1 {
                continue;
            }
            let mut v = vec![0.0; d];
            for (slot, &i) in free.iter().enumerate() {
                let x = parts[slot] as f64 / res as f64;
                v[i] = if signs & (1 << slot) != 0 { -x } else { x };
                if v[i] == 0.0 {
                    v[i] = 0.0;
                }
            }
            out.push(v);
        }
    });
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out.dedup();
    Ok(out)
}

fn compositions(total: usize, m: usize, parts: &mut Vec<usize>, slot: usize, f: &mut impl FnMut(&[usize])) {
    if slot == m - 1 {
        parts[slot] = total;
        f(parts);
        return;
    }
    for x in 0..=total {
        parts[slot] = x;
        compositions(total - x, m, parts, slot + 1, f);
    }
}

/// Whether `v` belongs to the direction set of `K` (up to normalisation).
pub fn in_direction_set(k: &[usize], v: &[f64]) -> bool {
    v.iter().enumerate().all(|(i, &x)| !k.contains(&i) || x == 0.0)
        && v.iter().enumerate().any(|(i, &x)| !k.contains(&i) && x >= 0.0)
        && v.iter().any(|&x| x != 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingOptions {
    pub resolution: usize,
    pub refine_iters: usize,
    /// Include the interior face `K = {}`. Needed for a subsolution; turning
    /// it off gives the boundary-faces-only diagnostic.
    pub include_interior: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub r: f64,
    pub face: Vec<usize>,
    pub direction: Vec<f64>,
}

/// `r = max |u|_1 / I*_K(u)` over every proper face `K` and direction `u`.
pub fn compute_scaling_r(params: &ModelParams, resolution: usize, refine_iters: usize) -> Result<f64, VpError> {
    compute_scaling(
        params,
        &ScalingOptions {
            resolution,
            refine_iters,
            include_interior: true,
        },
    )
    .map(|s| s.r)
}

pub fn compute_scaling(params: &ModelParams, opts: &ScalingOptions) -> Result<ScalingResult, VpError> {
    let d = params.dim();
    let start = if opts.include_interior { 0 } else { 1 };
    let mut best = ScalingResult {
        r: 0.0,
        face: vec![],
        direction: vec![],
    };
    for mask in start..(1u32 << d) - 1 {
        let k = mask_indices(mask, d);
        let mut scored = Vec::new();
        for v in direction_grid(d, &k, opts.resolution)? {
            let cost = local_cost_direction(params, &k, &v)?;
            if cost <= DEGENERATE_COST {
                return Err(VpError::DegenerateCost {
                    face: k,
                    direction: v,
                    cost,
                });
            }
            scored.push((cost, v));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let step0 = 1.0 / opts.resolution.max(1) as f64;
        for (cost, v) in scored.into_iter().take(3) {
            let (cost, v) = refine(params, &k, v, cost, step0, opts.refine_iters)?;
            if cost <= DEGENERATE_COST {
                return Err(VpError::DegenerateCost {
                    face: k,
                    direction: v,
                    cost,
                });
            }
            // |v|_1 = 1 on the direction set
            let ratio = 1.0 / cost;
            if ratio > best.r {
                best = ScalingResult {
                    r: ratio,
                    face: k.clone(),
                    direction: v,
                };
            }
        }
    }
    Ok(best)
}

/// Pattern search for the smallest local cost on the unit-L1 direction set
/// near `v`: coordinate moves of size `step`, renormalised, halving the step
/// when no move improves.
fn refine(
    params: &ModelParams,
    k: &[usize],
    mut v: Vec<f64>,
    mut cost: f64,
    mut step: f64,
    iters: usize,
) -> Result<(f64, Vec<f64>), VpError> {
    let free: Vec<usize> = (0..v.len()).filter(|i| !k.contains(i)).collect();
    for _ in 0..iters {
        if step < 1e-13 {
            break;
        }
        let mut improved: Option<(f64, Vec<f64>)> = None;
        for &i in &free {
            for sgn in [-1.0, 1.0] {
                let mut c = v.clone();
                c[i] += sgn * step;
                let norm = l1_norm(&c);
                if norm == 0.0 {
                    continue;
                }
                c.iter_mut().for_each(|x| *x /= norm);
                if !in_direction_set(k, &c) {
                    continue;
                }
                let cc = local_cost_direction(params, k, &c)?;
                if cc < improved.as_ref().map_or(cost, |b| b.0) {
                    improved = Some((cc, c));
                }
            }
        }
        match improved {
            Some((cc, c)) => {
                cost = cc;
                v = c;
            }
            None => step /= 2.0,
        }
    }
    Ok((cost, v))
}

fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub samples: usize,
    /// Draws rejected because no active subset passed (numerical ties).
    pub skipped: usize,
    pub violations: usize,
    /// Smallest value of `I*_K(w, v) - (T̄(w) - T̄(v))` seen.
    pub worst_margin: f64,
    pub slack: f64,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.skipped == 0
    }
}

/// Draws random face pairs `(K, w, v)` and checks
/// `T̄(w) - T̄(v) <= I*_K(w, v) + 1e-9`.
///
/// Coordinates in `K` are zero; the others are uniform on `(0, 1]`, and with
/// probability 1/4 one of the two points has that coordinate zeroed.
pub fn subsolution_inequality_check<R: Rng + ?Sized>(
    sub: &Subsolution,
    params: &ModelParams,
    samples: usize,
    rng: &mut R,
) -> InequalityReport {
    let slack = 1e-9;
    let d = params.dim();
    let mut report = InequalityReport {
        samples: 0,
        skipped: 0,
        violations: 0,
        worst_margin: f64::INFINITY,
        slack,
    };
    while report.samples < samples && report.skipped <= 10 * samples {
        let mask = rng.random_range(0..(1u32 << d) - 1);
        let k = mask_indices(mask, d);
        let mut w = vec![0.0; d];
        let mut v = vec![0.0; d];
        for i in (0..d).filter(|i| !k.contains(i)) {
            w[i] = 1.0 - rng.random::<f64>();
            v[i] = 1.0 - rng.random::<f64>();
            if rng.random::<f64>() < 0.25 {
                if rng.random::<bool>() {
                    w[i] = 0.0;
                } else {
                    v[i] = 0.0;
                }
            }
        }
        let Ok(lc) = local_cost(params, &k, &w, &v) else {
            report.skipped += 1;
            continue;
        };
        report.samples += 1;
        let margin = lc.cost - (sub.tbar(&w) - sub.tbar(&v));
        report.worst_margin = report.worst_margin.min(margin);
        if margin < -slack {
            report.violations += 1;
        }
    }
    report
}

/// `V(z) = delta T̄(z) / log(split_r)`.
pub fn importance_value(sub: &Subsolution, delta: f64, split_r: u32, z: &[f64]) -> f64 {
    delta * sub.tbar(z) / (split_r as f64).ln()
}

/// Smallest `j >= 0` with `z ∈ C_j`, where `C_0 = B` and
/// `C_j = {V <= (j - 1) delta / n}` for `j >= 1`.
pub fn level_index(sub: &Subsolution, delta: f64, split_r: u32, n: f64, z: &[f64]) -> u32 {
    if l1_sum(z) >= 1.0 {
        return 0;
    }
    level_from_value(importance_value(sub, delta, split_r, z), delta, n)
}

/// Level of a point outside `B` whose importance value is `v`.
pub fn level_from_value(v: f64, delta: f64, n: f64) -> u32 {
    let steps = (v * n / delta).ceil();
    if steps <= 0.0 {
        1
    } else {
        1 + steps.min(u32::MAX as f64 - 1.0) as u32
    }
}
