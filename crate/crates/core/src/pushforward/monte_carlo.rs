use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::PushforwardError;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonteCarloConfig {
    pub samples: usize,
    pub seed: u64,
    /// Fails when the achieved standard error is larger.
    pub target_stderr: Option<f64>,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0x5eed, target_stderr: None }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// Whether `value` lies within `k` standard errors. A few ulps are always
    /// allowed: for a line the integrand is constant, the standard error is
    /// pure rounding and would otherwise reject a mean that is off by one ulp.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        let rounding = 16.0 * f64::EPSILON * self.mean.abs().max(value.abs());
        (self.mean - value).abs() <= k * self.stderr + rounding
    }
}

const BATCH: usize = 4096;

/// Running count, mean and sum of squared deviations.
#[derive(Clone, Copy)]
struct Moments(f64, f64, f64);

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        let n = self.0 + o.0;
        if n == 0.0 {
            return self;
        }
        let delta = o.1 - self.1;
        Moments(n, self.1 + delta * o.0 / n, self.2 + o.2 + delta * delta * self.0 * o.0 / n)
    }
}

/// Estimates `E[(u^* C u / |u|^2)^{-r}]` for `u` uniform on the unit sphere of
/// `C^r`, which is the fiber integral whose closed form is `1/det C`.
/// Batches use independent streams, so the result does not depend on the thread count.
pub fn monte_carlo_oracle(c: &DMatrix<Complex64>, config: &MonteCarloConfig) -> Result<MonteCarloEstimate, PushforwardError> {
    let r = c.nrows();
    if r == 0 {
        return Err(PushforwardError::Empty);
    }
    let least = crate::numeric::min_eigenvalue(c);
    if !(least > 0.0) {
        return Err(PushforwardError::NotPositive(least));
    }
    if config.samples < 2 {
        return Err(PushforwardError::BudgetTooSmall { achieved: f64::INFINITY, target: config.target_stderr.unwrap_or(0.0) });
    }
    let batches = config.samples.div_ceil(BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(b as u64);
            let count = BATCH.min(config.samples - b * BATCH);
            let mut m = Moments(0.0, 0.0, 0.0);
            let mut u = vec![Complex64::new(0.0, 0.0); r];
            for _ in 0..count {
                for x in u.iter_mut() {
                    *x = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                }
                let norm: f64 = u.iter().map(|x| x.norm_sqr()).sum();
                let mut q = Complex64::new(0.0, 0.0);
                for i in 0..r {
                    for j in 0..r {
                        q += u[i].conj() * c[(i, j)] * u[j];
                    }
                }
                let v = (q.re / norm).powi(-(r as i32));
                m = m.merge(Moments(1.0, v, 0.0));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments(0.0, 0.0, 0.0), Moments::merge);
    let variance = total.2 / (total.0 - 1.0);
    let stderr = (variance / total.0).sqrt();
    if let Some(target) = config.target_stderr {
        if stderr > target {
            return Err(PushforwardError::BudgetTooSmall { achieved: stderr, target });
        }
    }
    Ok(MonteCarloEstimate { mean: total.1, stderr, samples: config.samples })
}

/// The scalar case `C = diag(c)`, matching [`scalar_fiber_integral`](super::scalar_fiber_integral).
pub fn monte_carlo_scalar(c: &[f64], config: &MonteCarloConfig) -> Result<MonteCarloEstimate, PushforwardError> {
    let d = DMatrix::from_fn(c.len(), c.len(), |i, j| if i == j { Complex64::new(c[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    monte_carlo_oracle(&d, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projective_line_volume() {
        let est = monte_carlo_scalar(&[1.0, 1.0], &MonteCarloConfig::default()).unwrap();
        assert_eq!(est.mean, 1.0);
        let est = monte_carlo_scalar(&[1.0, 2.0], &MonteCarloConfig::default()).unwrap();
        assert!(est.agrees_with(0.5, 3.0), "{est:?}");
        assert!(est.stderr < 0.01);
    }

    #[test]
    fn constant_integrand_of_a_line() {
        let est = monte_carlo_scalar(&[0.879859445839512], &MonteCarloConfig::default()).unwrap();
        assert!(est.stderr < 1e-15);
        assert!(est.agrees_with(1.0 / 0.879859445839512, 3.0), "{est:?}");
        assert!(!est.agrees_with(1.0 / 0.879859445839512 + 1e-12, 3.0));
    }

    #[test]
    fn rank_three_and_a_hermitian_twist() {
        let est = monte_carlo_scalar(&[1.0, 1.5, 0.7], &MonteCarloConfig::default()).unwrap();
        assert!(est.agrees_with(1.0 / (1.5 * 0.7), 3.0), "{est:?}");
        let c = DMatrix::from_row_slice(2, 2, &[Complex64::new(2.0, 0.0), Complex64::new(0.3, 0.4), Complex64::new(0.3, -0.4), Complex64::new(1.0, 0.0)]);
        let det = 2.0 - 0.25;
        let est = monte_carlo_oracle(&c, &MonteCarloConfig::default()).unwrap();
        assert!(est.agrees_with(1.0 / det, 3.0), "{est:?}");
    }

    #[test]
    fn independent_of_thread_count() {
        let cfg = MonteCarloConfig { samples: 20_000, seed: 3, target_stderr: None };
        let a = monte_carlo_scalar(&[1.0, 2.0, 0.5], &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| monte_carlo_scalar(&[1.0, 2.0, 0.5], &cfg).unwrap());
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }

    #[test]
    fn budget_errors() {
        let cfg = MonteCarloConfig { samples: 100, seed: 1, target_stderr: Some(1e-6) };
        assert!(matches!(monte_carlo_scalar(&[1.0, 2.0], &cfg), Err(PushforwardError::BudgetTooSmall { .. })));
        assert!(monte_carlo_scalar(&[1.0, -2.0], &MonteCarloConfig::default()).is_err());
    }
}
