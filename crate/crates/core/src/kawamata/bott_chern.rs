use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::chart::LocalChart;
use super::current::ScalarMetric;
use super::KawamataError;
use crate::numeric::{fit_slope, levi_matrix};

#[derive(Debug, Clone, Serialize)]
pub struct BottChernReport {
    pub steps: Vec<f64>,
    /// Largest coefficient error of `(i/2π)∂∂̄φ` against `c_1(h_2) - c_1(h_1)` per step.
    pub errors: Vec<f64>,
    /// Observed convergence order between consecutive steps.
    pub orders: Vec<f64>,
    pub fitted_order: f64,
    /// Largest change of `φ` under the deck rotation.
    pub deck_deviation: f64,
}

/// The potential `φ = ln(h_1/h_2)` of two line metrics on the cover.
pub fn bott_chern_potential(h1: &ScalarMetric, h2: &ScalarMetric, w: &[Complex64]) -> Result<f64, KawamataError> {
    let (a, b) = ((h1.tilde)(w), (h2.tilde)(w));
    if !(a > 0.0 && b > 0.0) {
        return Err(KawamataError::NonPositiveMetric);
    }
    Ok((a / b).ln())
}

/// Checks `(i/2π)∂∂̄ ln(h_1/h_2) = c_1(h_2) - c_1(h_1)` at the chart centers by
/// centered differences at each step, against the analytic curvatures.
pub fn bott_chern_line(h1: &ScalarMetric, h2: &ScalarMetric, chart: &LocalChart, steps: &[f64]) -> Result<BottChernReport, KawamataError> {
    let (l1, l2) = match (&h1.log_levi, &h2.log_levi) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => return Err(KawamataError::MissingAnalyticCurvature),
    };
    let centers: Vec<Vec<Complex64>> = chart.centers().iter().map(|c| c.w[0].clone()).collect();
    for w in &centers {
        bott_chern_potential(h1, h2, w)?;
    }
    let k = 1.0 / (2.0 * PI);
    let mut errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let mut worst = 0.0f64;
        for w in &centers {
            let phi = |x: &[Complex64]| ((h1.tilde)(x) / (h2.tilde)(x)).ln();
            let fd = levi_matrix(&phi, w, h);
            // c_1(h_2) - c_1(h_1) = (i/2π)(L_1 - L_2) with L = ∂∂̄ log h̃.
            let exact = l1(w) - l2(w);
            worst = worst.max((fd - exact).iter().map(|z| z.norm()).fold(0.0, f64::max) * k);
        }
        errors.push(worst);
    }
    let orders = steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(s, e)| (e[0] / e[1]).ln() / (s[0] / s[1]).ln())
        .collect();
    let x: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
    let zeta = chart.deck();
    let mut deck_deviation = 0.0f64;
    for w in &centers {
        let mut rotated = w.clone();
        rotated[0] *= zeta;
        deck_deviation = deck_deviation.max((bott_chern_potential(h1, h2, &rotated)? - bott_chern_potential(h1, h2, w)?).abs());
    }
    Ok(BottChernReport { steps: steps.to_vec(), errors, orders, fitted_order: fit_slope(&x, &y), deck_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kawamata::chart::ChartConfig;
    use nalgebra::DMatrix;

    fn chart() -> LocalChart {
        LocalChart::new(ChartConfig { cover_degree: 3, dim: 2, annuli: 4, angular: 4, ..ChartConfig::default() }).unwrap()
    }

    /// `h = exp(-|w_1|^4 - |w|^2 - ε Re(w_1^3 w̄_2))`-style invariant metric.
    fn quartic(scale: f64) -> ScalarMetric {
        ScalarMetric::new(move |w: &[Complex64]| (-scale * w[0].norm_sqr().powi(2) - w[1].norm_sqr()).exp()).with_log_levi(
            move |w: &[Complex64]| {
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[Complex64::new(-4.0 * scale * w[0].norm_sqr(), 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
                )
            },
        )
    }

    #[test]
    fn equal_metrics_have_zero_potential() {
        let h = quartic(1.0);
        let rep = bott_chern_line(&h, &h, &chart(), &[0.1, 0.05]).unwrap();
        assert!(rep.errors.iter().all(|&e| e == 0.0));
        assert_eq!(rep.deck_deviation, 0.0);
    }

    #[test]
    fn gaussian_twist_is_second_order() {
        let h1 = quartic(1.0);
        let h2 = ScalarMetric::new(|w: &[Complex64]| {
            (-w[0].norm_sqr().powi(2) - w[1].norm_sqr()).exp() * (-w.iter().map(|x| x.norm_sqr()).sum::<f64>()).exp()
        })
        .with_log_levi(|w: &[Complex64]| {
            DMatrix::from_row_slice(
                2,
                2,
                &[Complex64::new(-4.0 * w[0].norm_sqr() - 1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.0)],
            )
        });
        let rep = bott_chern_line(&h1, &h2, &chart(), &[0.1, 0.05, 0.025]).unwrap();
        // φ = |w|², a quadratic: central differences are exact up to rounding.
        assert!(rep.errors.iter().all(|&e| e < 1e-9), "{rep:?}");
        assert!(rep.deck_deviation < 1e-12);
        let rep = bott_chern_line(&quartic(1.0), &quartic(2.0), &chart(), &[0.1, 0.05, 0.025]).unwrap();
        assert!(rep.orders.iter().all(|&p| (p - 2.0).abs() < 0.2), "{rep:?}");
        assert!(rep.deck_deviation < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let zero = ScalarMetric::new(|_| 0.0).with_log_levi(|_| DMatrix::zeros(2, 2));
        assert!(matches!(bott_chern_line(&zero, &quartic(1.0), &chart(), &[0.1]), Err(KawamataError::NonPositiveMetric)));
        let no_levi = ScalarMetric::new(|_| 1.0);
        assert!(matches!(bott_chern_line(&no_levi, &quartic(1.0), &chart(), &[0.1]), Err(KawamataError::MissingAnalyticCurvature)));
    }
}
