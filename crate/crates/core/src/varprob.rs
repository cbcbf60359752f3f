//! The large-deviations variational problem.
//!
//! In two dimensions the value `I(z)` is explicit: it is the straight-line
//! interior cost unless `z` lies in a cone of boundary influence, in which
//! case the optimal path escapes along a reflective face. In any dimension
//! the cost of a straight segment constrained to a face `F_K` is computed by
//! searching the active subset `J* ⊆ K` that satisfies the optimality
//! conditions (a projected-velocity characterisation).

use nalgebra::{DMatrix, DVector};

use crate::error::VpError;
use crate::model::{check_2d_recurrence, mask_indices, ModelParams};

const COND_TOL: f64 = 1e-10;
const CONE_TOL: f64 = 1e-12;

/// Data for one face of the quadrant.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceData {
    /// Orthogonal to column `i` of `R`, with `|Sigma p|_D = 1`.
    pub p: DVector<f64>,
    /// Exit velocity `theta - 2 (theta . p) Sigma p`.
    pub a: DVector<f64>,
    pub reflective: bool,
    /// Face direction, D-normalised.
    pub e: DVector<f64>,
    /// Inward normal with `|Sigma n|_D = 1`.
    pub n: DVector<f64>,
    /// `a` reflected across the face in the D-geometry.
    pub atilde: DVector<f64>,
}

/// Explicit solution of the two-dimensional variational problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Vp2dSolution {
    pub faces: [FaceData; 2],
    pub theta: DVector<f64>,
    pub d_mat: DMatrix<f64>,
}

impl Vp2dSolution {
    fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.d_mat * v))
    }

    fn norm(&self, u: &DVector<f64>) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// Whether `z` lies in the cone of influence of face `i` (empty for a
    /// non-reflective face).
    pub fn in_cone(&self, i: usize, z: &[f64]) -> bool {
        let f = &self.faces[i];
        if !f.reflective {
            return false;
        }
        // z = alpha e + beta atilde with alpha, beta >= 0
        let det = f.e[0] * f.atilde[1] - f.e[1] * f.atilde[0];
        let scale = z[0].abs() + z[1].abs();
        if scale == 0.0 {
            return true;
        }
        if det.abs() < 1e-14 {
            // degenerate cone: the ray through e
            let cross = f.e[0] * z[1] - f.e[1] * z[0];
            return cross.abs() <= CONE_TOL * scale && f.e[0] * z[0] + f.e[1] * z[1] >= 0.0;
        }
        let alpha = (z[0] * f.atilde[1] - z[1] * f.atilde[0]) / det;
        let beta = (f.e[0] * z[1] - f.e[1] * z[0]) / det;
        alpha >= -CONE_TOL * scale && beta >= -CONE_TOL * scale
    }

    /// Interior cost `|theta|_D |z|_D - <theta, z>_D`.
    pub fn interior_cost(&self, z: &[f64]) -> f64 {
        let zv = DVector::from_column_slice(z);
        (self.norm(&self.theta) * self.norm(&zv) - self.inner(&self.theta, &zv)).max(0.0)
    }

    /// Boundary cost `<atilde_i - theta, z>_D`.
    pub fn face_cost(&self, i: usize, z: &[f64]) -> f64 {
        let zv = DVector::from_column_slice(z);
        self.inner(&(&self.faces[i].atilde - &self.theta), &zv)
    }
}

fn check_dim(params: &ModelParams, d: usize) -> Result<(), VpError> {
    if params.dim() != d {
        return Err(VpError::DimensionMismatch {
            expected: d,
            found: params.dim(),
        });
    }
    Ok(())
}

/// Exit velocities and cones of boundary influence for a two-dimensional
/// model.
pub fn solve_vp_2d(params: &ModelParams) -> Result<Vp2dSolution, VpError> {
    check_dim(params, 2)?;
    if !check_2d_recurrence(params)? {
        return Err(VpError::RecurrenceViolated);
    }
    let sigma = params.sigma();
    let theta = params.theta().clone();
    let r = params.refl();
    let face = |i: usize| -> FaceData {
        let col = r.column(i);
        let perp = DVector::from_vec(vec![-col[1], col[0]]);
        // |Sigma p|_D^2 = p^T Sigma p
        let p = &perp / perp.dot(&(sigma * &perp)).sqrt();
        let sp = sigma * &p;
        let a = &theta - &sp * (2.0 * theta.dot(&p));
        let reflective = a[i] < 0.0;
        let mut e = DVector::zeros(2);
        e[1 - i] = 1.0;
        let e = &e / params.norm_d(&e);
        let mut n = DVector::zeros(2);
        n[i] = 1.0 / sigma[(i, i)].sqrt();
        let sn = sigma * &n;
        let atilde = &e * params.inner_d(&a, &e) - &sn * params.inner_d(&a, &sn);
        FaceData {
            p,
            a,
            reflective,
            e,
            n,
            atilde,
        }
    };
    Ok(Vp2dSolution {
        faces: [face(0), face(1)],
        theta,
        d_mat: params.sigma_inv().clone(),
    })
}

/// Value `I(z)` of the two-dimensional variational problem.
pub fn vp2d_cost(sol: &Vp2dSolution, z: &[f64]) -> f64 {
    let c0 = sol.in_cone(0, z);
    let c1 = sol.in_cone(1, z);
    let v = match (c0, c1) {
        (false, false) => sol.interior_cost(z),
        (true, false) => sol.face_cost(0, z),
        (false, true) => sol.face_cost(1, z),
        (true, true) => sol.face_cost(0, z).min(sol.face_cost(1, z)),
    };
    v.max(0.0)
}

/// Minimum of `I` over `B = {z >= 0, z1 + z2 = 1}` (the infimum over the
/// whole of `B` is attained on this segment by homogeneity of `I`).
pub fn infimum_over_b_2d(sol: &Vp2dSolution) -> (f64, [f64; 2]) {
    let point = |t: f64| [t, 1.0 - t];
    let f = |t: f64| vp2d_cost(sol, &point(t));

    // break points where a cone edge crosses the segment
    let mut breaks = vec![0.0, 1.0];
    for face in &sol.faces {
        if !face.reflective {
            continue;
        }
        for ray in [&face.e, &face.atilde] {
            let s = ray[0] + ray[1];
            if s.abs() > 1e-15 {
                let t = ray[0] / s;
                if (0.0..=1.0).contains(&t) && ray[0] / s >= 0.0 && ray[1] / s >= 0.0 {
                    breaks.push(t);
                }
            }
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut best = (f64::INFINITY, 0.0);
    let mut consider = |t: f64| {
        let v = f(t);
        if v < best.0 {
            best = (v, t);
        }
    };
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        consider(lo);
        consider(hi);
        let t = golden_section(&f, lo, hi, 1e-13);
        consider(t);
    }
    let (v, t) = best;
    (v, point(t))
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Solved face-constrained local problem between two points.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCost {
    pub k: Vec<usize>,
    pub j_star: Vec<usize>,
    /// `card(J) x d`; empty when `J* = {}`.
    pub b_j: DMatrix<f64>,
    /// `d x d`; the identity when `J* = {}`.
    pub a_j: DMatrix<f64>,
    pub alpha: f64,
    pub lambda: Vec<f64>,
    pub cost: f64,
    pub b_k: Vec<f64>,
    pub duration: f64,
}

struct Candidate {
    b_j: DMatrix<f64>,
    a_j: DMatrix<f64>,
    alpha: f64,
    lambda: DVector<f64>,
    a_theta: DVector<f64>,
    a_u: DVector<f64>,
}

fn candidate(params: &ModelParams, j: &[usize], u: &DVector<f64>) -> Option<Candidate> {
    let d = params.dim();
    let dm = params.sigma_inv();
    let theta = params.theta();
    let (b_j, a_j) = if j.is_empty() {
        (DMatrix::zeros(0, d), DMatrix::identity(d, d))
    } else {
        let r_lj = params.refl().select_columns(j);
        let gram = r_lj.transpose() * dm * &r_lj;
        let b = gram.try_inverse()? * r_lj.transpose() * dm;
        let a = DMatrix::identity(d, d) - &r_lj * &b;
        (b, a)
    };
    let a_theta = &a_j * theta;
    let a_u = &a_j * u;
    let nu = params.norm_d(&a_u);
    if nu < 1e-14 {
        return None;
    }
    let alpha = params.norm_d(&a_theta) / nu;
    let lambda = if j.is_empty() {
        DVector::zeros(0)
    } else {
        &b_j * u * alpha - &b_j * theta
    };
    Some(Candidate {
        b_j,
        a_j,
        alpha,
        lambda,
        a_theta,
        a_u,
    })
}

fn passes(params: &ModelParams, k: &[usize], j: &[usize], u: &DVector<f64>, c: &Candidate) -> bool {
    if c.lambda.iter().any(|&l| l <= -COND_TOL) {
        return false;
    }
    let g = u * c.alpha - params.theta();
    k.iter().filter(|i| !j.contains(i)).all(|&i| {
        let arj = &c.a_j * params.refl().column(i);
        params.inner_d(&arj, &g) <= COND_TOL
    })
}

fn check_condition(d: usize, k: &[usize], w: &[f64], v: &[f64]) -> Result<(), VpError> {
    if w.len() != d || v.len() != d {
        return Err(VpError::DimensionMismatch {
            expected: d,
            found: w.len().max(v.len()),
        });
    }
    if k.iter().any(|&i| i >= d) {
        return Err(VpError::ConditionViolated(format!("face {k:?} out of range")));
    }
    if w.iter().chain(v).any(|&x| x < 0.0) {
        return Err(VpError::ConditionViolated("points must be in the orthant".into()));
    }
    if w == v {
        return Err(VpError::ConditionViolated("w equals v".into()));
    }
    if let Some(&i) = k.iter().find(|&&i| w[i] != 0.0 || v[i] != 0.0) {
        return Err(VpError::ConditionViolated(format!(
            "coordinate {i} must vanish on the face"
        )));
    }
    if let Some(j) = (0..d).find(|j| !k.contains(j) && w[*j] == 0.0 && v[*j] == 0.0) {
        return Err(VpError::ConditionViolated(format!(
            "coordinate {j} vanishes at both points but is not in the face"
        )));
    }
    Ok(())
}

fn subsets_ascending(k: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..(1 << k.len()))
        .map(|m| mask_indices(m, k.len()).into_iter().map(|p| k[p]).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b: &Vec<usize>| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn sorted_face(k: &[usize]) -> Vec<usize> {
    let mut k = k.to_vec();
    k.sort_unstable();
    k.dedup();
    k
}

/// Cost of the optimal straight path from `w` to `v` constrained to the face
/// `F_K` (0-based coordinate indices).
pub fn local_cost(params: &ModelParams, k: &[usize], w: &[f64], v: &[f64]) -> Result<LocalCost, VpError> {
    let k = sorted_face(k);
    check_condition(params.dim(), &k, w, v)?;
    let u = DVector::from_column_slice(v) - DVector::from_column_slice(w);
    local_cost_of(params, &k, &u)
}

fn local_cost_of(params: &ModelParams, k: &[usize], u: &DVector<f64>) -> Result<LocalCost, VpError> {
    for j in subsets_ascending(k) {
        let Some(c) = candidate(params, &j, u) else {
            continue;
        };
        if !passes(params, k, &j, u, &c) {
            continue;
        }
        let cost = (params.norm_d(&c.a_theta) * params.norm_d(&c.a_u) - params.inner_d(&c.a_theta, &c.a_u)).max(0.0);
        let b_k = if j.is_empty() {
            u * c.alpha
        } else {
            let r_lj = params.refl().select_columns(&j);
            u * c.alpha - &r_lj * (&c.b_j * u) * c.alpha + &r_lj * (&c.b_j * params.theta())
        };
        return Ok(LocalCost {
            k: k.to_vec(),
            j_star: j,
            b_j: c.b_j,
            a_j: c.a_j,
            alpha: c.alpha,
            lambda: c.lambda.iter().copied().collect(),
            cost,
            b_k: b_k.iter().copied().collect(),
            duration: if c.alpha > 0.0 { 1.0 / c.alpha } else { f64::INFINITY },
        });
    }
    Err(VpError::NoJStar)
}

/// Every subset `J ⊆ K` satisfying the optimality conditions (exhaustive;
/// used to check uniqueness of `J*`).
pub fn passing_subsets(params: &ModelParams, k: &[usize], w: &[f64], v: &[f64]) -> Result<Vec<Vec<usize>>, VpError> {
    let k = sorted_face(k);
    check_condition(params.dim(), &k, w, v)?;
    let u = DVector::from_column_slice(v) - DVector::from_column_slice(w);
    Ok(subsets_ascending(&k)
        .into_iter()
        .filter(|j| candidate(params, j, &u).is_some_and(|c| passes(params, &k, j, &u, &c)))
        .collect())
}

/// Splits a face direction `u` into a point pair `(w, v)` with `v - w = u`
/// that satisfies the face condition. Coordinates outside `K` where `u`
/// vanishes get a unit bump in both points.
pub fn direction_pair(k: &[usize], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut w = vec![0.0; u.len()];
    let mut v = vec![0.0; u.len()];
    for (i, &x) in u.iter().enumerate() {
        let bump = if x == 0.0 && !k.contains(&i) { 1.0 } else { 0.0 };
        w[i] = (-x).max(0.0) + bump;
        v[i] = x.max(0.0) + bump;
    }
    (w, v)
}

/// `I*_K(u)`: the local cost as a function of the displacement alone.
pub fn local_cost_direction(params: &ModelParams, k: &[usize], u: &[f64]) -> Result<f64, VpError> {
    let k = sorted_face(k);
    if let Some(&i) = k.iter().find(|&&i| u.get(i).is_some_and(|&x| x != 0.0)) {
        return Err(VpError::ConditionViolated(format!(
            "direction must vanish at coordinate {i}"
        )));
    }
    let (w, v) = direction_pair(&k, u);
    local_cost(params, &k, &w, &v).map(|c| c.cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn paper_2d() -> ModelParams {
        ModelParams::from_rows(
            &[-2.0, 1.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![1.0, 0.0], vec![-1.0, 1.0]],
            false,
        )
        .unwrap()
    }

    #[test]
    fn paper_2d_exit_velocities_and_cones() {
        let sol = solve_vp_2d(&paper_2d()).unwrap();
        let [f1, f2] = &sol.faces;
        let s = 0.5f64.sqrt();
        assert!((f1.p[0] - s).abs() < 1e-12 && (f1.p[1] - s).abs() < 1e-12 || (f1.p[0] + s).abs() < 1e-12);
        assert_abs_diff_eq!(f1.a[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f1.a[1], 2.0, epsilon = 1e-12);
        assert!(f1.reflective);
        assert_abs_diff_eq!(f2.a[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f2.a[1], 1.0, epsilon = 1e-12);
        assert!(!f2.reflective);
        assert_abs_diff_eq!(f1.atilde[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f1.atilde[1], 2.0, epsilon = 1e-12);
        assert!(sol.in_cone(0, &[0.0, 1.0]));
        assert!(sol.in_cone(0, &[1.0, 2.0]));
        assert!(!sol.in_cone(0, &[1.0, 1.0]));
        assert!(!sol.in_cone(1, &[1.0, 0.0]));
    }

    #[test]
    fn symmetric_model_has_two_reflective_faces() {
        let p = ModelParams::from_rows(
            &[-1.0, -1.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            false,
        )
        .unwrap();
        let sol = solve_vp_2d(&p).unwrap();
        assert_abs_diff_eq!(sol.faces[0].a[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.faces[0].a[1], 1.0, epsilon = 1e-12);
        assert!(sol.faces[0].reflective);
        assert_abs_diff_eq!(sol.faces[1].a[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.faces[1].a[1], -1.0, epsilon = 1e-12);
        assert!(sol.faces[1].reflective);
        // mirror symmetry of the whole value function
        assert_abs_diff_eq!(
            vp2d_cost(&sol, &[0.2, 0.7]),
            vp2d_cost(&sol, &[0.7, 0.2]),
            epsilon = 1e-12
        );
    }

    #[test]
    fn cost_values_2d() {
        let sol = solve_vp_2d(&paper_2d()).unwrap();
        assert_eq!(vp2d_cost(&sol, &[0.0, 0.0]), 0.0);
        // atilde_1 - theta = (3, 1)
        assert_abs_diff_eq!(vp2d_cost(&sol, &[0.0, 1.0]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vp2d_cost(&sol, &[1.0, 0.0]), 5f64.sqrt() + 2.0, epsilon = 1e-12);
        // continuity across the cone edge (1, 2): both formulas give 5
        assert_abs_diff_eq!(sol.interior_cost(&[1.0, 2.0]), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.face_cost(0, &[1.0, 2.0]), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn infimum_over_b_paper_2d() {
        let sol = solve_vp_2d(&paper_2d()).unwrap();
        let (v, z) = infimum_over_b_2d(&sol);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(z[0], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn recurrence_violation_is_an_error() {
        let p = ModelParams::from_rows(
            &[1.0, 1.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            false,
        )
        .unwrap();
        assert_eq!(solve_vp_2d(&p).unwrap_err(), VpError::RecurrenceViolated);
    }

    #[test]
    fn interior_local_cost() {
        let c = local_cost(&paper_2d(), &[], &[0.0, 0.0], &[1.0, 0.0]);
        // (0,0) -> (1,0) violates the face condition for K = {} at coordinate 2
        assert!(c.is_err());
        let c = local_cost(&paper_2d(), &[], &[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(c.j_star.is_empty());
        assert_abs_diff_eq!(c.cost, 5f64.sqrt() + 2.0, epsilon = 1e-12);
        // moving along the drift is free
        let c = local_cost(&paper_2d(), &[], &[2.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_abs_diff_eq!(c.cost, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn face_local_cost_up_and_down() {
        let p = paper_2d();
        let up = local_cost(&p, &[0], &[0.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_eq!(up.j_star, vec![0]);
        assert_abs_diff_eq!(up.b_j[(0, 0)], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(up.b_j[(0, 1)], -0.5, epsilon = 1e-12);
        for x in up.a_j.iter() {
            assert_abs_diff_eq!(*x, 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(up.alpha, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up.lambda[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up.cost, 1.0, epsilon = 1e-12);

        let down = local_cost(&p, &[0], &[0.0, 2.0], &[0.0, 1.0]).unwrap();
        assert_eq!(down.j_star, vec![0]);
        assert_abs_diff_eq!(down.cost, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(down.lambda[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn condition_violations() {
        let p = paper_2d();
        assert!(matches!(
            local_cost(&p, &[0], &[0.1, 1.0], &[0.0, 2.0]),
            Err(VpError::ConditionViolated(_))
        ));
        assert!(matches!(
            local_cost(&p, &[0], &[0.0, 1.0], &[0.0, 1.0]),
            Err(VpError::ConditionViolated(_))
        ));
    }

    #[test]
    fn direction_costs() {
        let p = paper_2d();
        assert_abs_diff_eq!(
            local_cost_direction(&p, &[], &[-2.0, 1.0]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            local_cost_direction(&p, &[0], &[0.0, 1.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let a = local_cost_direction(&p, &[], &[0.3, -0.7]).unwrap();
        let b = local_cost_direction(&p, &[], &[0.6, -1.4]).unwrap();
        assert_abs_diff_eq!(b, 2.0 * a, epsilon = 1e-12);
    }
}
