use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::chart::LocalChart;
use super::metric::frame_exponents;
use super::KawamataError;
use crate::forms::{CurvatureMatrix, FormValue};
use crate::numeric::cpow;
use crate::para::Weight;

pub type FormFn = Arc<dyn Fn(&[Complex64]) -> FormValue<Complex64> + Send + Sync>;
pub type CurvatureFn = Arc<dyn Fn(&[Complex64]) -> CurvatureMatrix<Complex64> + Send + Sync>;

/// Multiplies each monomial by `a` per `dw_1`/`dz_1` factor and `b` per barred factor.
fn rescale_first(form: &FormValue<Complex64>, a: Complex64, b: Complex64) -> FormValue<Complex64> {
    let mut out = FormValue::zero(form.dim());
    for (m, c) in form.terms() {
        let mut f = *c;
        if m.dz & 1 != 0 {
            f *= a;
        }
        if m.dzb & 1 != 0 {
            f *= b;
        }
        out.add_term(*m, f);
    }
    out
}

/// Rewrites a form in `dw` as a form in `dz` through `dw_1 = (w_1 / (N z_1)) dz_1`.
pub fn rewrite_to_base(form: &FormValue<Complex64>, w1: Complex64, cover_degree: u32) -> FormValue<Complex64> {
    let n = cover_degree as f64;
    let f = w1 / (w1.powu(cover_degree) * n);
    rescale_first(form, f, f.conj())
}

/// Pulls a form in `dz` back to the cover through `dz_1 = N w_1^{N-1} dw_1`.
pub fn pull_back_to_cover(form: &FormValue<Complex64>, w1: Complex64, cover_degree: u32) -> FormValue<Complex64> {
    let f = w1.powu(cover_degree - 1) * cover_degree as f64;
    rescale_first(form, f, f.conj())
}

/// The deck rotation applied to a form on the cover: `(γ^*η)(w) = η(ζw)` with
/// `dw_1 ↦ ζ dw_1`.
pub fn deck_pullback(eta: &FormFn, w: &[Complex64], zeta: Complex64) -> FormValue<Complex64> {
    let mut rotated = w.to_vec();
    rotated[0] *= zeta;
    rescale_first(&eta(&rotated), zeta, zeta.conj())
}

#[derive(Debug, Clone)]
pub struct FormSample {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub value: FormValue<Complex64>,
}

#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub theta: CurvatureMatrix<Complex64>,
}

fn form_gap(a: &FormValue<Complex64>, b: &FormValue<Complex64>) -> f64 {
    let scale = a.max_abs().max(b.max_abs()).max(1e-300);
    a.sub(b).max_abs() / scale
}

/// Largest relative change of `η̃` under the deck rotation on the chart's centers.
pub fn form_invariance_defect(eta: &FormFn, chart: &LocalChart) -> f64 {
    let zeta = chart.deck();
    chart
        .centers()
        .par_iter()
        .map(|c| form_gap(&deck_pullback(eta, &c.w[0], zeta), &eta(&c.w[0])))
        .reduce(|| 0.0, f64::max)
}

/// Descends an invariant form from the cover, evaluating on the grid centers.
/// Components with `dw_1` pick up `z_1^{1/N-1}/N`, those with `dw̄_1` the conjugate.
pub fn descend_form(eta: FormFn, chart: &LocalChart, tol: f64) -> Result<Vec<FormSample>, KawamataError> {
    let defect = form_invariance_defect(&eta, chart);
    if defect > tol {
        return Err(KawamataError::InvarianceViolation(defect));
    }
    let n = chart.cover_degree();
    Ok(chart
        .centers()
        .par_iter()
        .map(|c| {
            let w = c.w[0].clone();
            FormSample { z: c.z[0].clone(), value: rewrite_to_base(&eta(&w), w[0], n), w }
        })
        .collect())
}

/// The curvature of the descended metric,
/// `(Θ_H)_{ij} = z_1^{-a_{r+1-i}} Θ̃_{ij}(w(z)) z_1^{a_{r+1-j}}`, in `z`-coordinates.
pub fn curvature_descend(theta_tilde: CurvatureFn, weights: &[Weight], chart: &LocalChart) -> Result<Vec<CurvatureSample>, KawamataError> {
    let n = chart.cover_degree();
    let exps = frame_exponents(weights, n)?;
    let samples = chart
        .centers()
        .par_iter()
        .filter(|c| !c.straddles_cut)
        .map(|c| {
            let w = c.w[0].clone();
            let t = theta_tilde(&w);
            let r = t.rank();
            let entries = (0..r * r)
                .map(|k| {
                    let (a, b) = (k / r, k % r);
                    let g = cpow(w[0], exps[b] - exps[a]);
                    rewrite_to_base(&t.get(a, b).scale(&g), w[0], n)
                })
                .collect();
            CurvatureMatrix::new(r, entries).map(|theta| CurvatureSample { z: c.z[0].clone(), w, theta })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(samples)
}

/// The frame change `g = diag(w_1^{e_i})` and the differential `D = diag(w_1/(N z_1), 1, …)`
/// relating data at a sample: `s ↦ g s` and `v ↦ D v` map downstairs vectors to the cover.
pub fn matched_maps(w1: Complex64, weights: &[Weight], cover_degree: u32, dim: usize) -> Result<(Vec<Complex64>, Vec<Complex64>), KawamataError> {
    let exps = frame_exponents(weights, cover_degree)?;
    let g = exps.iter().map(|&e| cpow(w1, e)).collect();
    let f = w1 / (w1.powu(cover_degree) * cover_degree as f64);
    let d = (0..dim).map(|i| if i == 0 { f } else { Complex64::new(1.0, 0.0) }).collect();
    Ok((g, d))
}
