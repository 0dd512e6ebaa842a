use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::chart::LocalChart;
use super::KawamataError;
use crate::numeric::{cpow, min_eigenvalue};
use crate::para::Weight;

/// A matrix-valued function of the coordinates (of `z` or of `w`).
pub type MatrixFn = Arc<dyn Fn(&[Complex64]) -> DMatrix<Complex64> + Send + Sync>;

/// Exponents `N·a_{r+1-i}` of `w_1` attached to frame vector `i` (reversed weights).
pub fn frame_exponents(weights: &[Weight], cover_degree: u32) -> Result<Vec<i64>, KawamataError> {
    let mut sorted = weights.to_vec();
    sorted.sort();
    sorted
        .iter()
        .rev()
        .map(|w| w.cover_weight(cover_degree as u64).ok_or(KawamataError::WeightNotOnCover(w.to_string(), cover_degree)))
        .collect()
}

/// `conj(w^{e_i}) M_{ij} w^{e_j}`; with negated exponents this is the lift.
pub fn twist(m: &DMatrix<Complex64>, w1: Complex64, exps: &[i64], sign: i64) -> DMatrix<Complex64> {
    let f: Vec<Complex64> = exps.iter().map(|&e| cpow(w1, sign * e)).collect();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| f[i].conj() * m[(i, j)] * f[j])
}

/// A Hermitian metric on the punctured chart, sampled on the chart's stencils.
#[derive(Clone)]
pub struct LocalMetricField {
    chart: LocalChart,
    weights: Vec<Weight>,
    source: MatrixFn,
    values: Vec<[DMatrix<Complex64>; 5]>,
}

impl std::fmt::Debug for LocalMetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LocalMetricField")
            .field("cover_degree", &self.chart.cover_degree())
            .field("weights", &self.weights)
            .field("samples", &(self.values.len() * 5))
            .finish()
    }
}

impl LocalMetricField {
    /// Samples a metric given as a function of `z`.
    pub fn from_function(chart: LocalChart, weights: Vec<Weight>, source: MatrixFn) -> Result<Self, KawamataError> {
        let mut weights = weights;
        weights.sort();
        frame_exponents(&weights, chart.cover_degree())?;
        let values: Vec<[DMatrix<Complex64>; 5]> =
            chart.centers().par_iter().map(|c| c.z.clone().map(|z| source(&z))).collect();
        if let Some(m) = values.first() {
            if m[0].nrows() != weights.len() {
                return Err(KawamataError::Shape(format!("{}×{} metric for {} weights", m[0].nrows(), m[0].ncols(), weights.len())));
            }
        }
        Ok(Self { chart, weights, source, values })
    }

    pub fn chart(&self) -> &LocalChart {
        &self.chart
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn source(&self) -> &MatrixFn {
        &self.source
    }

    /// Sampled values, stencil by stencil.
    pub fn values(&self) -> &[[DMatrix<Complex64>; 5]] {
        &self.values
    }

    /// The lifts `H̃(w)` at every sample, each computed on the sample's own sheet.
    pub fn lift_samples(&self) -> Vec<[DMatrix<Complex64>; 5]> {
        let exps = frame_exponents(&self.weights, self.chart.cover_degree()).expect("checked at construction");
        self.chart
            .centers()
            .iter()
            .zip(&self.values)
            .map(|(c, vals)| std::array::from_fn(|k| twist(&vals[k], c.w[k][0], &exps, -1)))
            .collect()
    }

    /// Largest relative gap between the lifted samples and `h_tilde` on the cover.
    pub fn round_trip_deviation(&self, h_tilde: &MatrixFn) -> f64 {
        self.chart
            .centers()
            .iter()
            .zip(self.lift_samples())
            .flat_map(|(c, lifts)| (0..5).map(move |k| relative_gap(&lifts[k], &h_tilde(&c.w[k]))))
            .fold(0.0, f64::max)
    }

    /// The same metric sampled on another chart.
    pub fn resample(&self, chart: LocalChart) -> Result<Self, KawamataError> {
        Self::from_function(chart, self.weights.clone(), self.source.clone())
    }
}

impl LocalMetricField {
    /// Grid metadata and the center values, entries as `[re, im]` pairs in row order.
    pub fn to_json(&self) -> serde_json::Value {
        let cfg = self.chart.config();
        let samples: Vec<serde_json::Value> = self
            .chart
            .centers()
            .iter()
            .zip(&self.values)
            .map(|(c, v)| {
                let m = &v[0];
                let entries: Vec<[f64; 2]> =
                    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| [m[(i, j)].re, m[(i, j)].im]).collect();
                serde_json::json!({
                    "z": c.z[0].iter().map(|x| [x.re, x.im]).collect::<Vec<_>>(),
                    "annulus": c.annulus,
                    "H": entries,
                })
            })
            .collect();
        serde_json::json!({
            "grid": {
                "rho": cfg.rho,
                "radialNodes": cfg.annuli,
                "angularNodes": cfg.angular,
                "N": cfg.cover_degree,
            },
            "weights": self.weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "samples": samples,
        })
    }
}

fn relative_gap(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let scale = a.iter().chain(b.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale.max(1e-300)
}

/// Largest relative violation of `H̃_{ij}(ζw) = ζ^{e_i - e_j} H̃_{ij}(w)` on the grid centers.
pub fn invariance_defect(h_tilde: &MatrixFn, exps: &[i64], chart: &LocalChart) -> f64 {
    let zeta = chart.deck();
    chart
        .centers()
        .par_iter()
        .map(|c| {
            let w = &c.w[0];
            let mut rotated = w.clone();
            rotated[0] *= zeta;
            let base = h_tilde(w);
            let moved = h_tilde(&rotated);
            let expected = DMatrix::from_fn(base.nrows(), base.ncols(), |i, j| cpow(zeta, exps[i] - exps[j]) * base[(i, j)]);
            relative_gap(&moved, &expected)
        })
        .reduce(|| 0.0, f64::max)
}

/// The metric `H_{ij}(z) = conj(z_1^{a_{r+1-i}}) H̃_{ij}(w(z)) z_1^{a_{r+1-j}}` induced by
/// an invariant metric on the cover, evaluated on the chart's branch.
pub fn descend_metric(h_tilde: MatrixFn, weights: &[Weight], chart: &LocalChart, tol: f64) -> Result<LocalMetricField, KawamataError> {
    let n = chart.cover_degree();
    let mut sorted = weights.to_vec();
    sorted.sort();
    let exps = frame_exponents(&sorted, n)?;
    let defect = invariance_defect(&h_tilde, &exps, chart);
    if defect > tol {
        return Err(KawamataError::InvarianceViolation(defect));
    }
    let least = chart
        .centers()
        .iter()
        .map(|c| min_eigenvalue(&h_tilde(&c.w[0])))
        .fold(f64::INFINITY, f64::min);
    if least <= 0.0 {
        return Err(KawamataError::NotPositive(least));
    }
    let branch = chart.config().branch;
    let source: MatrixFn = Arc::new(move |z: &[Complex64]| {
        let mut w = z.to_vec();
        w[0] = branch.root(z[0], n);
        twist(&h_tilde(&w), w[0], &exps, 1)
    });
    LocalMetricField::from_function(chart.clone(), sorted, source)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmissibilityConfig {
    /// Largest allowed ratio between consecutive annuli for the sup norms.
    pub growth: f64,
    /// Absolute floor (relative to the overall size of the lift) below which growth is ignored.
    pub floor: f64,
    pub positivity: f64,
    /// Number of innermost annuli examined for growth.
    pub inner: usize,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        Self { growth: 1.25, floor: 1e-8, positivity: 1e-10, inner: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnulusDiagnostics {
    pub annulus: usize,
    pub radius: f64,
    pub sup_value: f64,
    pub sup_first: f64,
    pub sup_second: f64,
    pub min_eigenvalue: f64,
    pub sup_first_across_cut: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub bounded: bool,
    pub positive: bool,
    pub cut_consistent: bool,
    pub limit_eigenvalue: f64,
    pub cover_degree: u32,
    pub annuli: Vec<AnnulusDiagnostics>,
}

impl AdmissibilityReport {
    /// Per-annulus diagnostics, one row per annulus.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("annulus,radius,sup_value,sup_first,sup_second,min_eigenvalue,sup_first_across_cut\n");
        for a in &self.annuli {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                a.annulus, a.radius, a.sup_value, a.sup_first, a.sup_second, a.min_eigenvalue, a.sup_first_across_cut
            ));
        }
        out
    }
}

fn sup(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Decides whether the lift of `H` to the cover extends smoothly and
/// positively across `w_1 = 0`, from growth of the lift and of its finite
/// differences over shrinking annuli.
pub fn admissibility_check(field: &LocalMetricField, config: &AdmissibilityConfig) -> Result<AdmissibilityReport, KawamataError> {
    let chart = field.chart();
    let k_count = chart.config().annuli;
    if k_count < 4 {
        return Err(KawamataError::GridTooCoarse(k_count));
    }
    let lifts = field.lift_samples();
    let mut annuli: Vec<AnnulusDiagnostics> = (0..k_count)
        .map(|k| AnnulusDiagnostics {
            annulus: k,
            radius: chart.radius(k),
            sup_value: 0.0,
            sup_first: 0.0,
            sup_second: 0.0,
            min_eigenvalue: f64::INFINITY,
            sup_first_across_cut: 0.0,
        })
        .collect();
    for (c, l) in chart.centers().iter().zip(&lifts) {
        let a = &mut annuli[c.annulus];
        let h = c.step;
        for m in l.iter() {
            a.sup_value = a.sup_value.max(sup(m));
        }
        let first = sup(&(&l[1] - &l[2])).max(sup(&(&l[3] - &l[4]))) / (2.0 * h);
        let second = sup(&(&l[1] + &l[2] - &l[0] * Complex64::new(2.0, 0.0)))
            .max(sup(&(&l[3] + &l[4] - &l[0] * Complex64::new(2.0, 0.0))))
            / (h * h);
        // Rounding in the stencil values alone produces differences of this size.
        let noise = 32.0 * f64::EPSILON * l.iter().map(sup).fold(0.0, f64::max);
        let first = (first - noise / h).max(0.0);
        let second = (second - noise / (h * h)).max(0.0);
        if c.straddles_cut {
            a.sup_first_across_cut = a.sup_first_across_cut.max(first);
        } else {
            a.sup_first = a.sup_first.max(first);
            a.sup_second = a.sup_second.max(second);
        }
        a.min_eigenvalue = a.min_eigenvalue.min(min_eigenvalue(&l[0]));
    }
    let scale = 1.0 + annuli.iter().map(|a| a.sup_value).fold(0.0, f64::max);
    let floor = config.floor * scale;
    let tame = |q: &dyn Fn(&AnnulusDiagnostics) -> f64| -> bool {
        let start = k_count.saturating_sub(config.inner).max(1);
        (start..k_count).all(|k| q(&annuli[k]) <= config.growth * q(&annuli[k - 1]) + floor)
    };
    let bounded = tame(&|a| a.sup_value) && tame(&|a| a.sup_first) && tame(&|a| a.sup_second);
    let (last, prev) = (annuli[k_count - 1].min_eigenvalue, annuli[k_count - 2].min_eigenvalue);
    let limit_eigenvalue = last - (prev - last).abs();
    let positive = limit_eigenvalue > config.positivity;
    let cut_consistent = annuli
        .iter()
        .all(|a| a.sup_first_across_cut <= config.growth * a.sup_first + floor);
    Ok(AdmissibilityReport {
        admissible: bounded && positive && cut_consistent,
        bounded,
        positive,
        cut_consistent,
        limit_eigenvalue,
        cover_degree: chart.cover_degree(),
        annuli,
    })
}

/// Re-runs the admissibility check on the `u`-fold refined cover, where the
/// integer weights become `u·k`.
pub fn rebase_cover(field: &LocalMetricField, u: u32, config: &AdmissibilityConfig) -> Result<AdmissibilityReport, KawamataError> {
    if u < 1 {
        return Err(KawamataError::BadRebase(u));
    }
    let chart = field.chart().with_cover_degree(field.chart().cover_degree() * u)?;
    admissibility_check(&field.resample(chart)?, config)
}

/// A random smooth metric on the cover satisfying the deck-invariance rule
/// for the given weights: invariant diagonal, off-diagonal entries `c·w_1^p`
/// with `p ≡ e_i - e_j (mod N)`.
pub fn random_invariant_metric(weights: &[Weight], cover_degree: u32, seed: u64) -> Result<MatrixFn, KawamataError> {
    let exps = frame_exponents(weights, cover_degree)?;
    let r = exps.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diag: Vec<(f64, f64, f64)> =
        (0..r).map(|_| (rng.random_range(1.0..2.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect();
    let eps = 0.5 / r as f64;
    let mut off = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let p = (exps[i] - exps[j]).rem_euclid(cover_degree as i64) as u32;
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) / 2f64.sqrt();
            off.push((i, j, p, c * eps));
        }
    }
    Ok(Arc::new(move |w: &[Complex64]| {
        let w1 = w[0];
        let transverse: f64 = w[1..].iter().map(|x| x.norm_sqr()).sum();
        let mut m = DMatrix::from_fn(r, r, |i, j| {
            if i == j {
                let (d, a, b) = diag[i];
                Complex64::new(d * (1.0 + a * w1.norm_sqr() + b * transverse), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        for &(i, j, p, c) in &off {
            let v = c * w1.powu(p);
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kawamata::chart::ChartConfig;

    fn chart(n: u32, dim: usize) -> LocalChart {
        LocalChart::new(ChartConfig { cover_degree: n, dim, ..ChartConfig::default() }).unwrap()
    }

    fn w(s: &str) -> Weight {
        s.parse().unwrap()
    }

    fn scalar(f: impl Fn(&[Complex64]) -> f64 + Send + Sync + 'static) -> MatrixFn {
        Arc::new(move |x: &[Complex64]| DMatrix::from_element(1, 1, Complex64::new(f(x), 0.0)))
    }

    #[test]
    fn half_weight_constant_lift() {
        let c = chart(2, 1);
        let field = descend_metric(scalar(|_| 1.0), &[w("1/2")], &c, 1e-8).unwrap();
        for (center, vals) in c.centers().iter().zip(field.values()) {
            assert!((vals[0][(0, 0)].re - center.z[0][0].norm()).abs() < 1e-15);
        }
        assert!(admissibility_check(&field, &AdmissibilityConfig::default()).unwrap().admissible);
    }

    #[test]
    fn gaussian_descent_formula() {
        let c = chart(3, 2);
        let h = scalar(|x: &[Complex64]| (-x.iter().map(|v| v.norm_sqr()).sum::<f64>()).exp());
        let field = descend_metric(h, &[w("1/3")], &c, 1e-8).unwrap();
        for (center, vals) in c.centers().iter().zip(field.values()).take(100) {
            let z = &center.z[0];
            let a = z[0].norm();
            let expected = a.powf(2.0 / 3.0) * (-a.powf(2.0 / 3.0) - z[1].norm_sqr()).exp();
            assert!((vals[0][(0, 0)].re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_weights_plain_substitution() {
        let c = chart(2, 2);
        let h = random_invariant_metric(&[Weight::ZERO, Weight::ZERO], 2, 1).unwrap();
        let field = descend_metric(h.clone(), &[Weight::ZERO, Weight::ZERO], &c, 1e-8).unwrap();
        for (center, vals) in c.centers().iter().zip(field.values()) {
            let w = c.lift_point(&center.z[0]);
            assert!(relative_gap(&vals[0], &h(&w)) < 1e-14);
        }
    }

    #[test]
    fn unbounded_lift_is_rejected() {
        let c = chart(2, 1);
        let field = LocalMetricField::from_function(c, vec![w("1/2")], scalar(|_| 1.0)).unwrap();
        let rep = admissibility_check(&field, &AdmissibilityConfig::default()).unwrap();
        assert!(!rep.admissible && !rep.bounded);
    }

    #[test]
    fn kink_in_lift_is_rejected() {
        // Lift |w_1|: bounded, but its second differences blow up.
        let c = chart(2, 1);
        let field = LocalMetricField::from_function(c, vec![w("1/2")], scalar(|z| z[0].norm().powf(1.5))).unwrap();
        let rep = admissibility_check(&field, &AdmissibilityConfig::default()).unwrap();
        assert!(!rep.bounded);
    }

    #[test]
    fn jump_across_cut_is_rejected() {
        let c = chart(2, 1);
        let field = LocalMetricField::from_function(
            c,
            vec![Weight::ZERO],
            scalar(|z| 2.0 + (z[0].arg() / 2.0).sin()),
        )
        .unwrap();
        let rep = admissibility_check(&field, &AdmissibilityConfig::default()).unwrap();
        assert!(!rep.cut_consistent);
        assert!(!rep.admissible);
    }

    #[test]
    fn non_invariant_input_is_rejected() {
        let c = chart(2, 1);
        let h = scalar(|x: &[Complex64]| 2.0 + x[0].re);
        assert!(matches!(descend_metric(h, &[w("1/2")], &c, 1e-8), Err(KawamataError::InvarianceViolation(_))));
    }

    #[test]
    fn round_trip_rank_two() {
        let c = chart(4, 2);
        let ws = [w("1/4"), w("3/4")];
        let h = random_invariant_metric(&ws, 4, 9).unwrap();
        let field = descend_metric(h.clone(), &ws, &c, 1e-8).unwrap();
        let rep = admissibility_check(&field, &AdmissibilityConfig::default()).unwrap();
        assert!(rep.admissible, "{rep:?}");
        for (center, lifts) in c.centers().iter().zip(field.lift_samples()) {
            for k in 0..5 {
                assert!(relative_gap(&lifts[k], &h(&center.w[k])) < 1e-10);
            }
        }
        assert!(rebase_cover(&field, 2, &AdmissibilityConfig::default()).unwrap().admissible);
        assert!(matches!(rebase_cover(&field, 0, &AdmissibilityConfig::default()), Err(KawamataError::BadRebase(0))));
    }

    #[test]
    fn coarse_grid_is_an_error() {
        let c = LocalChart::new(ChartConfig { annuli: 3, dim: 1, ..ChartConfig::default() }).unwrap();
        let field = LocalMetricField::from_function(c, vec![Weight::ZERO], scalar(|_| 1.0)).unwrap();
        assert!(matches!(admissibility_check(&field, &AdmissibilityConfig::default()), Err(KawamataError::GridTooCoarse(3))));
    }

    #[test]
    fn descent_does_not_depend_on_the_branch() {
        use crate::kawamata::chart::Branch;
        let weights = [w("1/4"), w("3/4"), w("1/2")];
        let h = random_invariant_metric(&weights, 4, 11).unwrap();
        let principal = chart(4, 2);
        let alternate = LocalChart::new(ChartConfig { cover_degree: 4, dim: 2, branch: Branch::Alternate, ..ChartConfig::default() }).unwrap();
        let a = descend_metric(h.clone(), &weights, &principal, 1e-8).unwrap();
        let b = descend_metric(h, &weights, &alternate, 1e-8).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            for (p, q) in x.iter().zip(y) {
                let scale = p.iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!((p - q).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10 * (1.0 + scale));
            }
        }
    }

    #[test]
    fn exports_carry_grid_metadata() {
        let c = chart(2, 1);
        let field = descend_metric(scalar(|_| 1.0), &[w("1/2")], &c, 1e-8).unwrap();
        let json = field.to_json();
        assert_eq!(json["grid"]["N"], 2);
        assert_eq!(json["grid"]["radialNodes"], 9);
        assert_eq!(json["samples"].as_array().unwrap().len(), c.centers().len());
        let csv = admissibility_check(&field, &AdmissibilityConfig::default()).unwrap().to_csv();
        assert_eq!(csv.lines().count(), 10);
    }
}
