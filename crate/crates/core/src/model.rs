//! SRBM problem data and experiment scenario.

use nalgebra::{DMatrix, DVector};

use crate::error::ModelError;
use crate::skorokhod::Reflector;
use crate::MAX_DIM;

const MINOR_TOL: f64 = 1e-12;

/// Validated SRBM data `(theta, Sigma, R)` with `D = Sigma^{-1}` and a lower
/// Cholesky factor of `Sigma` precomputed.
#[derive(Debug, Clone)]
pub struct ModelParams {
    d: usize,
    theta: DVector<f64>,
    sigma: DMatrix<f64>,
    sigma_inv: DMatrix<f64>,
    sigma_chol: DMatrix<f64>,
    refl: DMatrix<f64>,
    m_matrix: bool,
    reflector: Reflector,
}

/// Builds a dense matrix from row-major nested rows.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, ModelError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(ModelError::DimensionMismatch {
            expected: ncols,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Validates model data. With `m_matrix_required`, additionally demands that
/// `refl` is a nonsingular M-matrix and that every drift component is
/// strictly negative.
pub fn validate(
    theta: &[f64],
    sigma: &DMatrix<f64>,
    refl: &DMatrix<f64>,
    m_matrix_required: bool,
) -> Result<ModelParams, ModelError> {
    let d = theta.len();
    if d == 0 || d > MAX_DIM {
        return Err(ModelError::Dimension(d));
    }
    for m in [sigma, refl] {
        if m.nrows() != d || m.ncols() != d {
            return Err(ModelError::DimensionMismatch {
                expected: d,
                found: if m.nrows() != d { m.nrows() } else { m.ncols() },
            });
        }
    }
    if theta.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::NonFinite("theta"));
    }
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::NonFinite("sigma"));
    }
    if refl.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::NonFinite("refl"));
    }

    let scale = sigma.amax().max(1.0);
    if (sigma - sigma.transpose()).amax() > 1e-12 * scale {
        return Err(ModelError::NotSpd);
    }
    let chol = sigma.clone().cholesky().ok_or(ModelError::NotSpd)?;
    let sigma_chol = chol.l();
    let sigma_inv = chol.inverse();

    if let Some(subset) = completely_s_violation(refl) {
        return Err(ModelError::NotCompletelyS(subset));
    }
    let m_matrix = is_m_matrix(refl);
    if m_matrix_required {
        if !m_matrix {
            return Err(ModelError::NotMMatrix);
        }
        if let Some(i) = theta.iter().position(|&t| t >= 0.0) {
            return Err(ModelError::DriftNotNegative(i));
        }
    }

    Ok(ModelParams {
        d,
        theta: DVector::from_column_slice(theta),
        sigma: sigma.clone(),
        sigma_inv,
        sigma_chol,
        refl: refl.clone(),
        m_matrix,
        reflector: Reflector::new(refl),
    })
}

impl ModelParams {
    /// Convenience constructor from row-major nested arrays.
    pub fn from_rows(
        theta: &[f64],
        sigma: &[Vec<f64>],
        refl: &[Vec<f64>],
        m_matrix_required: bool,
    ) -> Result<Self, ModelError> {
        validate(
            theta,
            &matrix_from_rows(sigma)?,
            &matrix_from_rows(refl)?,
            m_matrix_required,
        )
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// `D = Sigma^{-1}`.
    pub fn sigma_inv(&self) -> &DMatrix<f64> {
        &self.sigma_inv
    }

    /// Lower-triangular `L` with `L L^T = Sigma`.
    pub fn sigma_chol(&self) -> &DMatrix<f64> {
        &self.sigma_chol
    }

    pub fn refl(&self) -> &DMatrix<f64> {
        &self.refl
    }

    /// Whether `R` is a nonsingular M-matrix.
    pub fn is_m_matrix(&self) -> bool {
        self.m_matrix
    }

    pub fn reflector(&self) -> &Reflector {
        &self.reflector
    }

    /// `<u, v>_D = u^T D v`.
    pub fn inner_d(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.sigma_inv * v))
    }

    pub fn norm_d(&self, u: &DVector<f64>) -> f64 {
        self.inner_d(u, u).max(0.0).sqrt()
    }
}

/// Returns the first principal index set whose submatrix `G` admits no
/// `v >= 0` with `Gv > 0`, or `None` when `m` is completely-S.
///
/// Feasibility of `{v >= 0, Gv >= 1}` is decided by enumerating the vertices
/// of that polyhedron, which contains no lines and so has a vertex whenever
/// it is nonempty.
pub fn completely_s_violation(m: &DMatrix<f64>) -> Option<Vec<usize>> {
    let d = m.nrows();
    (1u32..(1 << d)).map(|mask| mask_indices(mask, d)).find(|idx| {
        let g = DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
        !positive_image_exists(&g)
    })
}

pub fn is_completely_s(m: &DMatrix<f64>) -> bool {
    completely_s_violation(m).is_none()
}

fn positive_image_exists(g: &DMatrix<f64>) -> bool {
    let k = g.nrows();
    for support in 1u32..(1 << k) {
        let s = mask_indices(support, k);
        for rows in 1u32..(1 << k) {
            if rows.count_ones() != support.count_ones() {
                continue;
            }
            let t = mask_indices(rows, k);
            let sub = DMatrix::from_fn(s.len(), s.len(), |i, j| g[(t[i], s[j])]);
            let Some(vs) = sub.lu().solve(&DVector::from_element(s.len(), 1.0)) else {
                continue;
            };
            if vs.iter().any(|&x| !x.is_finite() || x < -1e-12) {
                continue;
            }
            let mut v = DVector::zeros(k);
            for (pos, &i) in s.iter().enumerate() {
                v[i] = vs[pos].max(0.0);
            }
            if (g * v).iter().all(|&x| x >= 1.0 - 1e-9) {
                return true;
            }
        }
    }
    false
}

/// Leading principal minors `det(M[..k, ..k])` for `k = 1..=d`.
pub fn leading_minors(m: &DMatrix<f64>) -> Vec<f64> {
    (1..=m.nrows())
        .map(|k| m.view((0, 0), (k, k)).clone_owned().determinant())
        .collect()
}

/// Nonsingular M-matrix test: nonpositive off-diagonal entries and all
/// leading principal minors positive.
pub fn is_m_matrix(m: &DMatrix<f64>) -> bool {
    let d = m.nrows();
    let z_matrix = (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)] <= 0.0));
    z_matrix && leading_minors(m).iter().all(|&x| x > MINOR_TOL)
}

/// Indices of the set bits of `mask` among the first `d`.
pub fn mask_indices(mask: u32, d: usize) -> Vec<usize> {
    (0..d).filter(|&i| mask & (1 << i) != 0).collect()
}

/// Positive recurrence test for `d = 2`: with `R` column-normalized to unit
/// diagonal as `[[1, r2], [r1, 1]]`, requires `theta1 + r2 theta2^- < 0` and
/// `theta2 + r1 theta1^- < 0`.
pub fn check_2d_recurrence(params: &ModelParams) -> Result<bool, ModelError> {
    if params.dim() != 2 {
        return Err(ModelError::DimensionMismatch {
            expected: 2,
            found: params.dim(),
        });
    }
    let r = params.refl();
    for i in 0..2 {
        if r[(i, i)] <= 0.0 {
            return Err(ModelError::NonPositiveDiagonal(i));
        }
    }
    let r2 = r[(0, 1)] / r[(1, 1)];
    let r1 = r[(1, 0)] / r[(0, 0)];
    let t = params.theta();
    let neg = |x: f64| (-x).max(0.0);
    Ok(t[0] + r2 * neg(t[1]) < 0.0 && t[1] + r1 * neg(t[0]) < 0.0)
}

/// Scale, inner radius and start point. `A_n = {sum z <= eps/n}` and
/// `B = {sum z >= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: u32,
    pub epsilon: f64,
    pub start: Vec<f64>,
}

impl Scenario {
    pub fn new(n: u32, epsilon: f64, start: Vec<f64>) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::Scenario("scale n must be at least 1".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ModelError::Scenario(format!("epsilon {epsilon} is not in (0, 1)")));
        }
        if start.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(ModelError::Scenario(
                "start coordinates must be finite and nonnegative".into(),
            ));
        }
        let s = Self { n, epsilon, start };
        let l1 = l1_sum(&s.start);
        if !(l1 > s.a_level() && l1 < s.b_level()) {
            return Err(ModelError::Scenario(format!(
                "start L1 sum {l1} is not strictly between {} and 1",
                s.a_level()
            )));
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    pub fn a_level(&self) -> f64 {
        self.epsilon / self.n as f64
    }

    pub fn b_level(&self) -> f64 {
        1.0
    }

    pub fn in_a(&self, z: &[f64]) -> bool {
        l1_sum(z) <= self.a_level()
    }

    pub fn in_b(&self, z: &[f64]) -> bool {
        l1_sum(z) >= self.b_level()
    }
}

pub fn l1_sum(z: &[f64]) -> f64 {
    z.iter().sum()
}
