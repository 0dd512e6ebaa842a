use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::KawamataError;
use crate::numeric::levi_matrix;
use crate::para::{ample_degree_test, par_degree, ParabolicError, ParabolicModel};

#[derive(Debug, Clone, Serialize)]
pub struct AmpleLineReport {
    pub par_degree: f64,
    /// Least sampled curvature density of the constructed metric against the Fubini–Study form.
    pub margin: f64,
    /// Largest deviation of the sampled density from the parabolic degree.
    pub max_deviation: f64,
    pub ample: bool,
    /// Verdict of the degree criterion, for comparison.
    pub degree_verdict: bool,
}

/// Marked points on the affine line, one per label in label order.
pub fn marked_positions(count: usize) -> Vec<Complex64> {
    (0..count).map(|k| Complex64::from_polar(0.8, 2.0 * PI * k as f64 / count.max(1) as f64 + 0.3)).collect()
}

/// For a parabolic line on the projective line, builds the singular metric
/// `(1+|z|²)^{-d} ∏ (|z-p_k|²/(1+|z|²))^{a_k}` and measures its curvature
/// density against the Fubini–Study form at seeded sample points.
pub fn ample_line_check(model: &ParabolicModel, samples: usize, seed: u64, tol: f64) -> Result<AmpleLineReport, KawamataError> {
    if model.rank() != 1 {
        return Err(KawamataError::Shape(format!("expected a line, got rank {}", model.rank())));
    }
    let positions = marked_positions(model.points().len());
    let weights: Vec<f64> = model.points().values().map(|p| p.weights()[0].to_f64()).collect();
    let d = model.degree() as f64;
    let log_metric = |z: &[Complex64]| {
        let fs = (1.0 + z[0].norm_sqr()).ln();
        -d * fs + positions.iter().zip(&weights).map(|(p, a)| a * ((z[0] - p).norm_sqr().ln() - fs)).sum::<f64>()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut densities = Vec::with_capacity(samples);
    while densities.len() < samples {
        let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let gap = positions.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min);
        if gap < 0.1 {
            continue;
        }
        // Richardson extrapolation of two centered steps removes the leading error term.
        let step = 1e-2 * gap.min(1.0);
        let coarse = levi_matrix(&log_metric, &[z], step)[(0, 0)].re;
        let fine = levi_matrix(&log_metric, &[z], step / 2.0)[(0, 0)].re;
        let curvature = -(4.0 * fine - coarse) / 3.0;
        densities.push(curvature * (1.0 + z.norm_sqr()).powi(2));
    }
    let pd = par_degree(model);
    let exact = pd.to_f64().unwrap_or(f64::NAN);
    let margin = densities.iter().copied().fold(f64::INFINITY, f64::min);
    let max_deviation = densities.iter().map(|x| (x - exact).abs()).fold(0.0, f64::max);
    let degree_verdict = ample_degree_test(std::slice::from_ref(model)).map_err(para_error)?.ample;
    Ok(AmpleLineReport { par_degree: exact, margin, max_deviation, ample: margin > tol, degree_verdict })
}

fn para_error(e: ParabolicError) -> KawamataError {
    KawamataError::Shape(e.to_string())
}

/// Twenty parabolic lines with parabolic degrees of both signs and zero.
pub fn ample_line_fixtures() -> Vec<ParabolicModel> {
    let specs: [(i64, &[(i64, i64)]); 20] = [
        (1, &[]),
        (0, &[]),
        (-1, &[]),
        (0, &[(1, 2)]),
        (-1, &[(1, 2)]),
        (-1, &[(1, 2), (1, 2)]),
        (-1, &[(1, 3), (1, 3)]),
        (-1, &[(1, 3), (1, 3), (1, 3)]),
        (-1, &[(1, 3), (1, 3), (1, 4)]),
        (-2, &[(2, 3), (3, 4), (5, 6)]),
        (-2, &[(1, 2), (3, 4), (3, 4)]),
        (-2, &[(1, 2), (1, 4), (1, 4)]),
        (2, &[(1, 5)]),
        (-3, &[(5, 6), (5, 6), (2, 3), (1, 2)]),
        (-3, &[(1, 2), (1, 2), (1, 2), (1, 2)]),
        (-3, &[(1, 6), (1, 6), (1, 6), (1, 6)]),
        (0, &[(1, 12), (5, 12)]),
        (-1, &[(7, 12), (5, 12)]),
        (-1, &[(7, 12), (1, 4)]),
        (3, &[(11, 12), (1, 2), (1, 3)]),
    ];
    specs
        .iter()
        .map(|(deg, ws)| {
            let points: Vec<(String, Vec<crate::para::Weight>)> = ws
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| (format!("p{k}"), vec![crate::para::Weight::from_fraction(a, b).expect("fixture weight")]))
                .collect();
            ParabolicModel::new(1, *deg, points).expect("fixture line")
        })
        .collect()
}
