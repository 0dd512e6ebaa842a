use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::chart::LocalChart;
use super::metric::MatrixFn;
use super::KawamataError;
use crate::forms::{cholesky_lower, least_relative_eigen, FormValue};
use crate::numeric::{complex_gradient, levi_matrix};

/// A Kähler form `ω = i Σ g_{ij} dz_i ∧ dz̄_j` at a sample.
#[derive(Debug, Clone)]
pub struct KahlerSample {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub g: DMatrix<Complex64>,
}

impl KahlerSample {
    pub fn form(&self) -> FormValue<Complex64> {
        let n = self.g.nrows();
        let coeffs: Vec<Complex64> = (0..n * n).map(|k| Complex64::i() * self.g[(k / n, k % n)]).collect();
        FormValue::from_11(n, &coeffs)
    }

    /// Coefficients on the cover: `D^* g D` with `D = diag(N w_1^{N-1}, 1, …)`.
    pub fn pulled_back(&self, cover_degree: u32) -> DMatrix<Complex64> {
        let n = self.g.nrows();
        let f = self.w[0].powu(cover_degree - 1) * cover_degree as f64;
        let d: Vec<Complex64> = (0..n).map(|i| if i == 0 { f } else { Complex64::new(1.0, 0.0) }).collect();
        DMatrix::from_fn(n, n, |i, j| d[i].conj() * self.g[(i, j)] * d[j])
    }
}

fn check_exponent(alpha: f64) -> Result<(), KawamataError> {
    if !(0.0..2.0).contains(&alpha) {
        return Err(KawamataError::ConeExponent(alpha));
    }
    Ok(())
}

/// `|z_1|^{-α} dz_1 ∧ dz̄_1 + Σ_{i>1} dz_i ∧ dz̄_i` on the grid centers.
pub fn cone_metric(alpha: f64, chart: &LocalChart) -> Result<Vec<KahlerSample>, KawamataError> {
    check_exponent(alpha)?;
    let n = chart.dim();
    Ok(chart
        .centers()
        .iter()
        .map(|c| {
            let z = c.z[0].clone();
            let g = DMatrix::from_fn(n, n, |i, j| match (i, j) {
                (0, 0) => Complex64::new(z[0].norm().powf(-alpha), 0.0),
                _ if i == j => Complex64::new(1.0, 0.0),
                _ => Complex64::new(0.0, 0.0),
            });
            KahlerSample { z, w: c.w[0].clone(), g }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibleKahlerReport {
    /// Smallest `k` with `k ω + i∂∂̄|σ|^{2-α}` positive at every sample.
    pub k_min: f64,
    pub k: f64,
    pub positive: bool,
    /// Least eigenvalue of the constructed metric relative to the cone model.
    pub domination: f64,
    #[serde(skip)]
    pub samples: Vec<KahlerSample>,
}

/// Builds `k ω + i∂∂̄ (|z_1|^2 h)^{(2-α)/2}`. The singular factor `|z_1|^{2-α}` is
/// differentiated in closed form; the smooth weight `h` by finite differences.
/// With `k = None` the report uses `k_min + 1`.
pub fn make_admissible_kahler(
    omega: MatrixFn,
    h_divisor: Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>,
    alpha: f64,
    k: Option<f64>,
    chart: &LocalChart,
) -> Result<AdmissibleKahlerReport, KawamataError> {
    check_exponent(alpha)?;
    let beta = (2.0 - alpha) / 2.0;
    let n = chart.dim();
    let cone = cone_metric(alpha, chart)?;
    let parts: Vec<(DMatrix<Complex64>, DMatrix<Complex64>, f64)> = chart
        .centers()
        .par_iter()
        .map(|c| {
            let z = &c.z[0];
            let step = 1e-4 * (1.0 + z.iter().map(|x| x.norm()).fold(0.0, f64::max));
            let v = |x: &[Complex64]| h_divisor(x).powf(beta);
            let v0 = v(z);
            let dv = complex_gradient(&v, z, step);
            let lv = levi_matrix(&v, z, step);
            let r2 = z[0].norm_sqr();
            let u = r2.powf(beta);
            let mut du = vec![Complex64::new(0.0, 0.0); n];
            du[0] = beta * u / z[0];
            let b = DMatrix::from_fn(n, n, |i, j| {
                let luu = if i == 0 && j == 0 { beta * beta * u / r2 } else { 0.0 };
                lv[(i, j)] * u + du[i] * dv[j].conj() + dv[i] * du[j].conj() + Complex64::new(luu * v0, 0.0)
            });
            let g = omega(z);
            let least = match cholesky_lower(&g) {
                Ok(l) => least_relative_eigen(&b, &l).0,
                Err(_) => f64::NEG_INFINITY,
            };
            (g, b, least)
        })
        .collect();
    if parts.iter().any(|p| p.2 == f64::NEG_INFINITY) {
        return Err(KawamataError::ReferenceNotPositive);
    }
    let k_min = parts.iter().map(|p| (-p.2).max(0.0)).fold(0.0, f64::max);
    let k = k.unwrap_or(k_min + 1.0);
    let mut samples = Vec::with_capacity(parts.len());
    let mut domination = f64::INFINITY;
    let mut positive = true;
    for ((g, b, _), (c, model)) in parts.into_iter().zip(chart.centers().iter().zip(&cone)) {
        let total = &g * Complex64::new(k, 0.0) + b;
        let l = cholesky_lower(&model.g).expect("cone model is positive");
        domination = domination.min(least_relative_eigen(&total, &l).0);
        positive &= crate::numeric::min_eigenvalue(&total) > 0.0;
        samples.push(KahlerSample { z: c.z[0].clone(), w: c.w[0].clone(), g: total });
    }
    Ok(AdmissibleKahlerReport { k_min, k, positive, domination, samples })
}
