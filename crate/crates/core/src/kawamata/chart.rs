use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::KawamataError;

/// Which branch of `z_1^{1/N}` is used when a point is only known downstairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Cut along the negative real `z_1`-axis.
    Principal,
    /// Cut along the positive imaginary `z_1`-axis.
    Alternate,
}

impl Branch {
    /// The `w_1` with `w_1^N = z_1` on this branch.
    pub fn root(self, z1: Complex64, n: u32) -> Complex64 {
        let mut arg = z1.arg();
        if self == Branch::Alternate && arg > PI / 2.0 {
            arg -= 2.0 * PI;
        }
        Complex64::from_polar(z1.norm().powf(1.0 / n as f64), arg / n as f64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartConfig {
    pub dim: usize,
    pub cover_degree: u32,
    /// Outer radius of the sampled annuli in `|w_1|`; transverse samples stay in `|z_i| <= rho`.
    pub rho: f64,
    /// Number of annuli `|w_1| = rho 2^{-k}`, `k = 0..annuli`.
    pub annuli: usize,
    pub angular: usize,
    pub transverse: usize,
    /// Relative stencil step: `h = stencil |w_1|`.
    pub stencil: f64,
    pub branch: Branch,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self { dim: 2, cover_degree: 2, rho: 0.5, annuli: 9, angular: 8, transverse: 2, stencil: 0.05, branch: Branch::Principal }
    }
}

/// A sample center together with its finite-difference stencil. Every point is
/// stored on the cover (`w`) and downstairs (`z`); `w` is the sheet used to lift.
#[derive(Debug, Clone)]
pub struct Center {
    pub annulus: usize,
    /// `[center, +h, -h, +ih, -ih]` in the `w_1` coordinate.
    pub w: [Vec<Complex64>; 5],
    pub z: [Vec<Complex64>; 5],
    pub step: f64,
    /// Whether some stencil point leaves the sector `|arg w_1| < π/N`, so that
    /// its `z` lies across the branch cut from the center.
    pub straddles_cut: bool,
}

/// The branched chart `w_1^N = z_1` with a sample grid on the punctured polydisk.
#[derive(Debug, Clone)]
pub struct LocalChart {
    config: ChartConfig,
    centers: Vec<Center>,
}

pub fn to_base(w: &[Complex64], n: u32) -> Vec<Complex64> {
    let mut z = w.to_vec();
    z[0] = w[0].powu(n);
    z
}

impl LocalChart {
    pub fn new(config: ChartConfig) -> Result<Self, KawamataError> {
        if config.cover_degree == 0 {
            return Err(KawamataError::Chart("cover degree must be at least 1".into()));
        }
        if config.dim == 0 || config.angular == 0 || config.transverse == 0 {
            return Err(KawamataError::Chart("empty grid".into()));
        }
        if !(config.rho > 0.0 && config.rho <= 1.0) || !(config.stencil > 0.0 && config.stencil < 0.5) {
            return Err(KawamataError::Chart("rho must lie in (0, 1] and the stencil in (0, 1/2)".into()));
        }
        let n = config.cover_degree;
        let sector = PI / n as f64;
        let mut angles: Vec<f64> = (0..config.angular)
            .map(|m| -sector + (m as f64 + 0.5) * 2.0 * sector / config.angular as f64)
            .collect();
        // One center close enough to the cut that its stencil crosses it.
        angles.push(sector - config.stencil / 3.0);
        let transverse: Vec<Vec<Complex64>> = (0..config.transverse)
            .map(|t| {
                (1..config.dim)
                    .map(|i| {
                        let radius = config.rho * 0.6 * (t + 1) as f64 / config.transverse as f64;
                        Complex64::from_polar(radius, 0.7 * t as f64 + 1.3 * i as f64)
                    })
                    .collect()
            })
            .collect();
        let mut centers = Vec::new();
        for k in 0..config.annuli {
            let radius = config.rho * 0.5f64.powi(k as i32);
            for &theta in &angles {
                for tv in &transverse {
                    let w1 = Complex64::from_polar(radius, theta);
                    let h = config.stencil * radius;
                    let offsets = [
                        Complex64::new(0.0, 0.0),
                        Complex64::new(h, 0.0),
                        Complex64::new(-h, 0.0),
                        Complex64::new(0.0, h),
                        Complex64::new(0.0, -h),
                    ];
                    let w: [Vec<Complex64>; 5] = offsets.map(|d| {
                        let mut v = vec![w1 + d];
                        v.extend_from_slice(tv);
                        v
                    });
                    let z = w.clone().map(|v| to_base(&v, n));
                    let straddles_cut = w.iter().any(|v| v[0].arg().abs() >= sector);
                    centers.push(Center { annulus: k, w, z, step: h, straddles_cut });
                }
            }
        }
        Ok(Self { config, centers })
    }

    pub fn config(&self) -> &ChartConfig {
        &self.config
    }

    pub fn cover_degree(&self) -> u32 {
        self.config.cover_degree
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn centers(&self) -> &[Center] {
        &self.centers
    }

    pub fn radius(&self, annulus: usize) -> f64 {
        self.config.rho * 0.5f64.powi(annulus as i32)
    }

    /// Generator `e^{2πi/N}` of the deck group.
    pub fn deck(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI / self.config.cover_degree as f64)
    }

    /// The same grid on the `u`-fold refined cover, keeping all other settings.
    pub fn with_cover_degree(&self, n: u32) -> Result<Self, KawamataError> {
        Self::new(ChartConfig { cover_degree: n, ..self.config.clone() })
    }

    /// Sheet of `z` on the configured branch.
    pub fn lift_point(&self, z: &[Complex64]) -> Vec<Complex64> {
        let mut w = z.to_vec();
        w[0] = self.config.branch.root(z[0], self.config.cover_degree);
        w
    }
}
