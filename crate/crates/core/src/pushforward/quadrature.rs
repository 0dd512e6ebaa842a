use rayon::prelude::*;
use serde::Serialize;

use super::PushforwardError;
use crate::numeric::{gauss_legendre_on, pairwise_sum};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel for the coarse pass; the fine pass doubles it.
    pub points: usize,
    /// Bound on the integral outside the truncated box and over skipped cells.
    pub tail: f64,
    /// Largest accepted error estimate.
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { points: 8, tail: 1e-9, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// `|Q_p - Q_{2p}|` plus the tail bound.
    pub error_estimate: f64,
    pub tail_bound: f64,
    pub truncation: f64,
    /// Box cells in the truncated domain, before skipping.
    pub cells: usize,
}

/// Panels `[0, 1/4], [1/4, 1], [1, 4], …` up to `upper`.
fn panels(upper: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.25)];
    let mut a = 0.25;
    while a < upper {
        out.push((a, a * 4.0));
        a *= 4.0;
    }
    out
}

fn integrand(c: &[f64], t: &[f64]) -> f64 {
    let denom = c[0] + t.iter().zip(&c[1..]).map(|(t, c)| t * c).sum::<f64>();
    denom.powi(-(c.len() as i32))
}

/// Tensor Gauss–Legendre over one box cell.
fn cell_sum(c: &[f64], rules: &[&[(f64, f64)]]) -> f64 {
    let d = rules.len();
    let mut idx = vec![0usize; d];
    let mut t = vec![0.0; d];
    let mut acc = Vec::new();
    loop {
        let mut w = 1.0;
        for k in 0..d {
            t[k] = rules[k][idx[k]].0;
            w *= rules[k][idx[k]].1;
        }
        acc.push(w * integrand(c, &t));
        let mut k = 0;
        loop {
            if k == d {
                return pairwise_sum(&acc);
            }
            idx[k] += 1;
            if idx[k] < rules[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Coarse and fine sums over the product of panels, and the bound on cells
/// skipped because the integrand is negligible there. The integrand decreases
/// in every variable, so its value at a cell's lower corner bounds the cell.
fn box_sums(c: &[f64], grid: &[(f64, f64)], points: usize, skip: f64) -> (f64, f64, f64) {
    let d = c.len() - 1;
    if d == 0 {
        let v = integrand(c, &[]);
        return (v, v, 0.0);
    }
    let coarse: Vec<Vec<(f64, f64)>> = grid.iter().map(|&(a, b)| gauss_legendre_on(points, a, b)).collect();
    let fine: Vec<Vec<(f64, f64)>> = grid.iter().map(|&(a, b)| gauss_legendre_on(2 * points, a, b)).collect();
    let cells = grid.len().pow(d as u32);
    let results: Vec<(f64, f64, f64)> = (0..cells)
        .into_par_iter()
        .map(|mut id| {
            let mut panel = Vec::with_capacity(d);
            for _ in 0..d {
                panel.push(id % grid.len());
                id /= grid.len();
            }
            let corner: Vec<f64> = panel.iter().map(|&k| grid[k].0).collect();
            let volume: f64 = panel.iter().map(|&k| grid[k].1 - grid[k].0).product();
            let bound = volume * integrand(c, &corner);
            if bound < skip {
                return (0.0, 0.0, bound);
            }
            let rc: Vec<&[(f64, f64)]> = panel.iter().map(|&k| coarse[k].as_slice()).collect();
            let rf: Vec<&[(f64, f64)]> = panel.iter().map(|&k| fine[k].as_slice()).collect();
            (cell_sum(c, &rc), cell_sum(c, &rf), 0.0)
        })
        .collect();
    let col = |f: fn(&(f64, f64, f64)) -> f64| pairwise_sum(&results.iter().map(f).collect::<Vec<_>>());
    (col(|x| x.0), col(|x| x.1), col(|x| x.2))
}

/// `(r-1)! ∫_{R_+^{r-1}} dt / (c_0 + Σ c_i t_i)^r`, the fiber integral of the top
/// power of the Fubini–Study form twisted by `diag(c)`; its closed form is `1/∏c_i`.
pub fn scalar_fiber_integral(c: &[f64], config: &QuadratureConfig) -> Result<QuadratureResult, PushforwardError> {
    if c.is_empty() {
        return Err(PushforwardError::Empty);
    }
    if let Some(&bad) = c.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(PushforwardError::NotPositive(bad));
    }
    let r = c.len();
    let factorial: f64 = (1..r).map(|k| k as f64).product();
    let rest: f64 = c[1..].iter().product();
    // Mass of {t_i > T}: 1/(∏_{j≥1} c_j (c_0 + c_i T)), summed over i.
    let tail_at = |t: f64| -> f64 { c[1..].iter().map(|ci| 1.0 / (rest * (c[0] + ci * t))).sum() };
    let mut upper = 1.0;
    while r > 1 && tail_at(upper) > config.tail {
        upper *= 4.0;
    }
    let tail = if r > 1 { tail_at(upper) } else { 0.0 };
    let grid = panels(upper);
    let cells = grid.len().pow(r as u32 - 1) as f64;
    let (coarse, fine, skipped) = box_sums(c, &grid, config.points, config.tail / cells);
    let (coarse, fine, skipped) = (factorial * coarse, factorial * fine, factorial * skipped);
    let tail = tail + skipped;
    let estimate = (fine - coarse).abs() + tail;
    if estimate > config.tolerance {
        return Err(PushforwardError::NotConverged { value: fine, estimate, tolerance: config.tolerance });
    }
    Ok(QuadratureResult { value: fine, error_estimate: estimate, tail_bound: tail, truncation: upper, cells: cells as usize })
}
