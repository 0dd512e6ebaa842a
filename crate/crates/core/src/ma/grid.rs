use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::MaError;

/// Uniform `M×M` grid on the unit square with periodic ends, row-major with
/// the first coordinate as the slow index.
#[derive(Clone)]
pub struct TorusGrid {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TorusGrid({})", self.m)
    }
}

/// Second derivatives `(∂₁∂₁, ∂₂∂₂, ∂₁∂₂)` of a field.
#[derive(Debug, Clone)]
pub struct Hessian {
    pub xx: Vec<f64>,
    pub yy: Vec<f64>,
    pub xy: Vec<f64>,
}

impl TorusGrid {
    pub fn new(m: usize) -> Result<Self, MaError> {
        if m < 4 {
            return Err(MaError::GridSize(m));
        }
        let mut planner = FftPlanner::new();
        Ok(Self { m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let h = 1.0 / self.m as f64;
        ((k / self.m) as f64 * h, (k % self.m) as f64 * h)
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len()).map(|k| self.coords(k)).map(|(x, y)| f(x, y)).collect()
    }

    pub fn mean(&self, v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    /// Wavenumber `2πk` of index `k`, with the Nyquist mode dropped so
    /// that derivatives of real fields stay real and commute exactly.
    fn multiplier(&self, k: usize) -> f64 {
        let m = self.m;
        if 2 * k == m {
            0.0
        } else if 2 * k < m {
            2.0 * PI * k as f64
        } else {
            2.0 * PI * (k as f64 - m as f64)
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        plan.process(data);
        // columns: transpose, transform rows, transpose back
        let mut t = vec![Complex64::default(); m * m];
        for i in 0..m {
            for j in 0..m {
                t[j * m + i] = data[i * m + j];
            }
        }
        plan.process(&mut t);
        for i in 0..m {
            for j in 0..m {
                data[i * m + j] = t[j * m + i];
            }
        }
    }

    pub fn fft(&self, v: &[f64]) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut d, &self.forward);
        d
    }

    pub fn ifft(&self, mut d: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut d, &self.inverse);
        let n = self.len() as f64;
        d.iter().map(|c| c.re / n).collect()
    }

    /// Wavenumbers `(k₁, k₂)` of spectral index `k`.
    pub fn wavenumbers(&self, k: usize) -> (f64, f64) {
        (self.multiplier(k / self.m), self.multiplier(k % self.m))
    }

    pub fn hessian_of_spectrum(&self, hat: &[Complex64]) -> Hessian {
        let part = |f: &dyn Fn(f64, f64) -> f64| {
            let d: Vec<Complex64> = hat
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let (a, b) = self.wavenumbers(k);
                    c * f(a, b)
                })
                .collect();
            self.ifft(d)
        };
        Hessian { xx: part(&|a, _| -a * a), yy: part(&|_, b| -b * b), xy: part(&|a, b| -a * b) }
    }

    pub fn hessian(&self, v: &[f64]) -> Hessian {
        self.hessian_of_spectrum(&self.fft(v))
    }

    /// First derivatives `(∂₁, ∂₂)` of a field.
    pub fn gradient(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hat = self.fft(v);
        let part = |axis: usize| {
            let d = hat
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let (a, b) = self.wavenumbers(k);
                    c * Complex64::new(0.0, if axis == 0 { a } else { b })
                })
                .collect();
            self.ifft(d)
        };
        (part(0), part(1))
    }

    /// Applies `hat ↦ hat · symbol(k₁, k₂)` for an even real symbol and transforms back.
    pub fn apply_symbol(&self, v: &[f64], symbol: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let hat = self.fft(v);
        let d = hat
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let (a, b) = self.wavenumbers(k);
                c * symbol(a, b)
            })
            .collect();
        self.ifft(d)
    }

    /// Shifts a field by whole cells.
    pub fn translate(&self, v: &[f64], di: usize, dj: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; v.len()];
        for i in 0..m {
            for j in 0..m {
                out[((i + di) % m) * m + (j + dj) % m] = v[i * m + j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_derivatives_of_trig_polynomials_are_exact() {
        let g = TorusGrid::new(16).unwrap();
        let f = g.sample(|x, y| (2.0 * PI * x).cos() * (4.0 * PI * y).sin());
        let h = g.hessian(&f);
        for k in 0..g.len() {
            let (x, y) = g.coords(k);
            let (c, s) = ((2.0 * PI * x).cos(), (4.0 * PI * y).sin());
            let w1 = 2.0 * PI;
            let w2 = 4.0 * PI;
            assert!((h.xx[k] + w1 * w1 * c * s).abs() < 1e-9);
            assert!((h.yy[k] + w2 * w2 * c * s).abs() < 1e-9);
            assert!((h.xy[k] + w1 * w2 * (2.0 * PI * x).sin() * (4.0 * PI * y).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn hessian_determinant_integrates_to_zero() {
        let g = TorusGrid::new(12).unwrap();
        let f = g.sample(|x, y| (x * 2.0 * PI).sin().exp() * (1.0 + 0.3 * (2.0 * PI * (x + 2.0 * y)).cos()));
        let h = g.hessian(&f);
        let total: f64 = (0..g.len()).map(|k| h.xx[k] * h.yy[k] - h.xy[k] * h.xy[k]).sum();
        let scale: f64 = (0..g.len()).map(|k| h.xx[k].abs() * h.yy[k].abs()).sum();
        assert!(total.abs() < 1e-12 * scale, "{total}");
    }

    #[test]
    fn tiny_grids_are_rejected() {
        assert!(TorusGrid::new(2).is_err());
    }
}
