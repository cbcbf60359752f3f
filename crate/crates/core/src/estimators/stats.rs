//! Sample statistics and decay-rate fitting.

use crate::error::EstimatorError;

const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std_error: f64,
    /// `mean ± 1.96 SE`, unclamped.
    pub ci95: [f64; 2],
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
    sum_sq: f64,
    max: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.sum_sq += x * x;
        self.max = if self.count == 1 { x } else { self.max.max(x) };
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Mean of the squared samples.
    pub fn second_moment(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum_sq / self.count as f64
        }
    }

    /// Sample standard deviation with the `n - 1` denominator.
    pub fn std_dev(&self) -> Option<f64> {
        (self.count >= 2).then(|| (self.m2.max(0.0) / (self.count - 1) as f64).sqrt())
    }

    pub fn summary(&self) -> Result<Summary, EstimatorError> {
        let sd = self.std_dev().ok_or(EstimatorError::InsufficientSamples)?;
        let se = sd / (self.count as f64).sqrt();
        Ok(Summary {
            mean: self.mean,
            std_error: se,
            ci95: [self.mean - Z95 * se, self.mean + Z95 * se],
        })
    }
}

pub fn statistics(samples: &[f64]) -> Result<Summary, EstimatorError> {
    let mut m = Moments::default();
    samples.iter().for_each(|&x| m.push(x));
    m.summary()
}

/// Clamps an interval to `[0, 1]`.
pub fn clamp_probability(ci: [f64; 2]) -> [f64; 2] {
    [ci[0].clamp(0.0, 1.0), ci[1].clamp(0.0, 1.0)]
}

/// Least-squares slope of `log(estimate)` against `n`.
pub fn decay_rate(points: &[(u32, f64)]) -> Result<f64, EstimatorError> {
    if let Some(&(n, _)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(EstimatorError::NonPositiveEstimate(n));
    }
    let first = points.first().map(|p| p.0);
    if points.len() < 2 || points.iter().all(|p| Some(p.0) == first) {
        return Err(EstimatorError::InsufficientSamples);
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(n, e) in points {
        let dx = n as f64 - mx;
        sxy += dx * (e.ln() - my);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn four_bernoulli_samples() {
        let s = statistics(&[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.5);
        assert_abs_diff_eq!(s.std_error, (1.0f64 / 12.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.ci95[0], -0.0658, epsilon = 1e-4);
        assert_abs_diff_eq!(s.ci95[1], 1.0658, epsilon = 1e-4);
        assert_eq!(clamp_probability(s.ci95), [0.0, 1.0]);
    }

    #[test]
    fn constant_and_single() {
        assert_eq!(statistics(&[0.3; 5]).unwrap().std_error, 0.0);
        assert_eq!(statistics(&[0.3]).unwrap_err(), EstimatorError::InsufficientSamples);
    }

    #[test]
    fn decay_rate_on_table_values() {
        let r = decay_rate(&[(10, 5.55e-6), (15, 3.8e-8)]).unwrap();
        assert_abs_diff_eq!(r, -0.9965, epsilon = 1e-3);
        assert_eq!(
            decay_rate(&[(5, 1e-3), (10, 0.0)]).unwrap_err(),
            EstimatorError::NonPositiveEstimate(10)
        );
        assert_eq!(
            decay_rate(&[(5, 1e-3), (5, 2e-3)]).unwrap_err(),
            EstimatorError::InsufficientSamples
        );
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let pts: Vec<(u32, f64)> = (1..6).map(|n| (n, 3.0 * (-0.7 * n as f64).exp())).collect();
        assert_abs_diff_eq!(decay_rate(&pts).unwrap(), -0.7, epsilon = 1e-12);
    }
}
