use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::chart::LocalChart;
use super::curvature::{rewrite_to_base, FormFn, FormSample};
use super::metric::{admissibility_check, descend_metric, AdmissibilityConfig, MatrixFn};
use super::KawamataError;
use crate::forms::FormValue;
use crate::numeric::{fit_slope, gauss_legendre_on, levi_matrix, pairwise_sum};
use crate::para::Weight;

/// A smooth, positive, deck-invariant line metric on the cover, with an
/// optional closed form for `∂∂̄ log h̃`.
#[derive(Clone)]
pub struct ScalarMetric {
    pub tilde: Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>,
    pub log_levi: Option<MatrixFn>,
}

impl ScalarMetric {
    pub fn new(tilde: impl Fn(&[Complex64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { tilde: Arc::new(tilde), log_levi: None }
    }

    pub fn with_log_levi(mut self, levi: impl Fn(&[Complex64]) -> DMatrix<Complex64> + Send + Sync + 'static) -> Self {
        self.log_levi = Some(Arc::new(levi));
        self
    }

    /// `∂_i ∂̄_j log h̃`, analytic when available and by finite differences otherwise.
    pub fn levi_of_log(&self, w: &[Complex64]) -> DMatrix<Complex64> {
        match &self.log_levi {
            Some(l) => l(w),
            None => {
                let f = |x: &[Complex64]| (self.tilde)(x).ln();
                let scale = 1.0 + w.iter().map(|x| x.norm()).fold(0.0, f64::max);
                levi_matrix(&f, w, 1e-4 * scale)
            }
        }
    }

    /// Coefficients `T_{ij}` of `c_1(h̃) = (i/2π) Σ T_{ij} dw_i ∧ dw̄_j`, that is `T = -∂∂̄ log h̃`.
    pub fn first_chern_coefficients(&self, w: &[Complex64]) -> DMatrix<Complex64> {
        -self.levi_of_log(w)
    }

    /// `c_1(h̃)` as a form on the cover.
    pub fn first_chern_form(&self, w: &[Complex64]) -> FormValue<Complex64> {
        let t = self.first_chern_coefficients(w);
        let n = w.len();
        let k = Complex64::new(0.0, 1.0 / (2.0 * PI));
        let coeffs: Vec<Complex64> = (0..n * n).map(|m| k * t[(m / n, m % n)]).collect();
        FormValue::from_11(n, &coeffs)
    }

    fn as_matrix_fn(&self) -> MatrixFn {
        let f = self.tilde.clone();
        Arc::new(move |w: &[Complex64]| DMatrix::from_element(1, 1, Complex64::new(f(w), 0.0)))
    }
}

impl std::fmt::Debug for ScalarMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarMetric").field("analytic_levi", &self.log_levi.is_some()).finish()
    }
}

/// `∫_{|z|<1} |z|^{2/N-2} dA` by Gauss–Legendre on dyadic annuli. Returns the
/// value and the bound on the omitted inner disk.
pub fn singular_weight_integral(cover_degree: u32) -> (f64, f64) {
    let p = 2.0 / cover_degree as f64;
    let mut parts = Vec::new();
    let mut outer = 1.0f64;
    loop {
        let inner = outer / 2.0;
        let s: f64 = gauss_legendre_on(20, inner, outer).iter().map(|(r, w)| w * r.powf(p - 1.0)).sum();
        parts.push(2.0 * PI * s);
        // The disk of radius `inner` contributes π N inner^{2/N}.
        let tail = PI * cover_degree as f64 * inner.powf(p);
        outer = inner;
        if tail < 1e-9 {
            return (pairwise_sum(&parts), tail);
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LineCurrent {
    /// Smooth part `c_1(h) + α[D]` on the chart centers, written in `z`.
    #[serde(skip)]
    pub smooth: Vec<FormSample>,
    pub divisor_mass: f64,
    pub weight_integral: f64,
    pub weight_integral_closed_form: f64,
    pub weight_integral_tail: f64,
    pub integrable: bool,
}

/// Splits `c_1(h)` for `h = h̃(w)|z_1|^{2α}` into its `L¹` part and `α` times
/// the current of integration along `z_1 = 0`.
pub fn line_current_decomposition(h: &ScalarMetric, alpha: Weight, chart: &LocalChart) -> Result<LineCurrent, KawamataError> {
    let field = descend_metric(h.as_matrix_fn(), &[alpha], chart, 1e-8)?;
    let report = admissibility_check(&field, &AdmissibilityConfig::default())?;
    if !report.admissible {
        return Err(KawamataError::NotAdmissible);
    }
    let n = chart.cover_degree();
    let smooth = chart
        .centers()
        .par_iter()
        .filter(|c| !c.straddles_cut)
        .map(|c| {
            let w = c.w[0].clone();
            FormSample { z: c.z[0].clone(), value: rewrite_to_base(&h.first_chern_form(&w), w[0], n), w }
        })
        .collect();
    let (weight_integral, tail) = singular_weight_integral(n);
    let closed = PI * n as f64;
    Ok(LineCurrent {
        smooth,
        divisor_mass: alpha.to_f64(),
        weight_integral,
        weight_integral_closed_form: closed,
        weight_integral_tail: tail,
        integrable: (weight_integral - closed).abs() < 1e-6,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MassBalance {
    /// `∫_{|z_1|<R}` of the smooth part, in units where a point mass has mass 1.
    pub smooth_mass: f64,
    /// Same for `c_1(h̃)` over `|w_1| < R^{1/N}`.
    pub cover_mass: f64,
    /// `-(1/4π) ∮ ∂_r log h ds` on `|z_1| = R`: the mass of the whole current `c_1(h)`.
    pub flux_mass: f64,
    pub divisor_mass: f64,
}

/// Compares masses on the slice `z' = w'` fixed: the smooth part downstairs,
/// `c_1(h̃)` upstairs and the boundary flux of `log h`.
pub fn mass_balance(h: &ScalarMetric, alpha: Weight, cover_degree: u32, transverse: &[Complex64], radius: f64) -> MassBalance {
    let n = cover_degree;
    let point = |w1: Complex64| {
        let mut w = vec![w1];
        w.extend_from_slice(transverse);
        w
    };
    let t11 = |w1: Complex64| h.first_chern_coefficients(&point(w1))[(0, 0)].re;
    let angles: Vec<f64> = (0..64).map(|k| 2.0 * PI * k as f64 / 64.0).collect();
    // Polar integral over |x| < outer of f, with dyadic radial panels.
    let disk = |outer: f64, f: &(dyn Fn(f64, f64) -> f64 + Sync)| -> f64 {
        let mut parts = Vec::new();
        let mut hi = outer;
        while hi > outer * 1e-40 {
            let lo = hi / 2.0;
            for (r, wr) in gauss_legendre_on(16, lo, hi) {
                let ring: f64 = angles.iter().map(|&t| f(r, t)).sum::<f64>() * 2.0 * PI / angles.len() as f64;
                parts.push(wr * r * ring);
            }
            hi = lo;
        }
        pairwise_sum(&parts)
    };
    let p = 1.0 / n as f64;
    let smooth_mass = disk(radius, &|r, t| {
        let w1 = Complex64::from_polar(r.powf(p), t * p);
        t11(w1) * r.powf(2.0 * p - 2.0) / (n * n) as f64
    }) / PI;
    let cover_mass = disk(radius.powf(p), &|r, t| t11(Complex64::from_polar(r, t))) / PI;
    let a = alpha.to_f64();
    let log_h = |r: f64, t: f64| {
        let w1 = Complex64::from_polar(r.powf(p), t * p);
        (h.tilde)(&point(w1)).ln() + 2.0 * a * r.ln()
    };
    let step = 1e-4 * radius;
    let flux: Vec<f64> = gauss_legendre_on(32, 0.0, 2.0 * PI)
        .into_iter()
        .map(|(t, wt)| wt * radius * (log_h(radius + step, t) - log_h(radius - step, t)) / (2.0 * step))
        .collect();
    MassBalance { smooth_mass, cover_mass, flux_mass: -pairwise_sum(&flux) / (4.0 * PI), divisor_mass: a }
}

/// Value of a form on real tangent vectors, each given by its `dz`-components.
pub fn evaluate_on_vectors(form: &FormValue<Complex64>, vectors: &[Vec<Complex64>]) -> Complex64 {
    let k = vectors.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (m, c) in form.terms() {
        if m.degree() != k {
            continue;
        }
        let rows: Vec<Box<dyn Fn(&Vec<Complex64>) -> Complex64>> = m
            .dz_indices()
            .into_iter()
            .map(|i| Box::new(move |v: &Vec<Complex64>| v[i]) as Box<dyn Fn(&Vec<Complex64>) -> Complex64>)
            .chain(m.dzb_indices().into_iter().map(|j| Box::new(move |v: &Vec<Complex64>| v[j].conj()) as Box<_>))
            .collect();
        let mat = DMatrix::from_fn(k, k, |a, b| rows[a](&vectors[b]));
        total += c * mat.determinant();
    }
    total
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosednessReport {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub expected_slope: f64,
}

/// For a 2-form `η̃` on a two-dimensional cover, the boundary pairing
/// `∮_{|z_1|=ε} η ∧ ψ` with `ψ = φ(z_2) dz_2`, `φ = (1-|z_2|²)²` on the unit disk,
/// over the given radii, and the log-log decay rate.
pub fn closedness_residual(eta_tilde: FormFn, cover_degree: u32, radii: &[f64]) -> ClosednessReport {
    let n = cover_degree;
    let psi = |z2: Complex64| FormValue::dz(2, 1).scale(&Complex64::new((1.0 - z2.norm_sqr()).powi(2), 0.0));
    let radial = gauss_legendre_on(16, 0.0, 1.0);
    let ring = 32;
    let residuals: Vec<f64> = radii
        .par_iter()
        .map(|&eps| {
            let mut parts = Vec::new();
            for k in 0..ring {
                let theta = -PI + 2.0 * PI * (k as f64 + 0.5) / ring as f64;
                let z1 = Complex64::from_polar(eps, theta);
                let w1 = Complex64::from_polar(eps.powf(1.0 / n as f64), theta / n as f64);
                for &(r, wr) in &radial {
                    for m in 0..ring {
                        let z2 = Complex64::from_polar(r, 2.0 * PI * m as f64 / ring as f64);
                        let eta = rewrite_to_base(&eta_tilde(&[w1, z2]), w1, n);
                        let form = eta.wedge(&psi(z2));
                        let vectors = [
                            vec![Complex64::new(0.0, 1.0) * z1, Complex64::new(0.0, 0.0)],
                            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)],
                        ];
                        let v = evaluate_on_vectors(&form, &vectors);
                        parts.push(v * wr * r);
                    }
                }
            }
            let scale = (2.0 * PI / ring as f64) * (2.0 * PI / ring as f64);
            let re: Vec<f64> = parts.iter().map(|c| c.re).collect();
            let im: Vec<f64> = parts.iter().map(|c| c.im).collect();
            Complex64::new(pairwise_sum(&re), pairwise_sum(&im)).norm() * scale
        })
        .collect();
    let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = residuals.iter().map(|r| r.max(1e-300).ln()).collect();
    ClosednessReport { radii: radii.to_vec(), slope: fit_slope(&x, &y), residuals, expected_slope: 2.0 / n as f64 }
}
