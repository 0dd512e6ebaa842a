use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::grid::TorusGrid;
use super::MaError;
use crate::forms::{chern_forms, kobayashi_lubke_rhs, CurvatureMatrix};

/// A Hermitian `2×2` matrix `g`, standing for the real `(1,1)`-form `i Σ g_jk dz_j ∧ dz̄_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hermitian2 {
    pub g11: f64,
    pub g22: f64,
    pub g12: Complex64,
}

impl Hermitian2 {
    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12.norm_sqr()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let half_gap = (0.25 * (self.g11 - self.g22).powi(2) + self.g12.norm_sqr()).sqrt();
        0.5 * (self.g11 + self.g22) - half_gap
    }

    /// Adds a real symmetric matrix `s·(xx, yy, xy)`.
    pub fn plus_real(&self, s: f64, xx: f64, yy: f64, xy: f64) -> Self {
        Self { g11: self.g11 + s * xx, g22: self.g22 + s * yy, g12: self.g12 + s * xy }
    }
}

/// Monge–Ampère data on the flat torus for a bundle of rank `r`.
///
/// The curvature is given per node as a matrix of `(1,1)`-forms in two
/// variables that depend only on the real parts `x₁, x₂` of the coordinates.
#[derive(Debug, Clone)]
pub struct MaProblem {
    rank: usize,
    grid: TorusGrid,
    theta: Vec<CurvatureMatrix<Complex64>>,
    eta: Vec<f64>,
    eta_scale: f64,
    background: Vec<Hermitian2>,
    kl: Vec<f64>,
}

/// Relative size allowed for the closedness defect of the first Chern form.
const CLOSED_TOL: f64 = 1e-8;

impl MaProblem {
    pub fn new(rank: usize, grid: TorusGrid, theta: Vec<CurvatureMatrix<Complex64>>, eta: Vec<f64>) -> Result<Self, MaError> {
        let n = grid.len();
        if rank == 0 || theta.len() != n || eta.len() != n {
            return Err(MaError::Shape(format!("rank {rank}, {} curvature nodes and {} target nodes on a grid of {n}", theta.len(), eta.len())));
        }
        let mut background = Vec::with_capacity(n);
        let mut kl = Vec::with_capacity(n);
        for t in &theta {
            if t.rank() != rank || t.dim() != 2 {
                return Err(MaError::Shape(format!("curvature of rank {} in dimension {}", t.rank(), t.dim())));
            }
            let c = chern_forms(t);
            let c1 = c.c(1);
            // c₁ = i Σ g dz ∧ dz̄, so g = -i · coefficient
            let g = |j, k| c1.coeff_11(j, k) * Complex64::new(0.0, -1.0) / rank as f64;
            let (g11, g22, g12, g21) = (g(0, 0), g(1, 1), g(0, 1), g(1, 0));
            let scale = g11.norm() + g22.norm() + g12.norm() + 1.0;
            let defect = g11.im.abs().max(g22.im.abs()).max((g12 - g21.conj()).norm());
            if defect > 1e-10 * scale {
                return Err(MaError::NotReal(defect));
            }
            background.push(Hermitian2 { g11: g11.re, g22: g22.re, g12 });
            kl.push(kobayashi_lubke_rhs(&c, rank)?.top_coefficient().re);
        }
        let p = Self { rank, grid, theta, eta, eta_scale: 1.0, background, kl };
        let defect = p.closedness_defect();
        if defect > CLOSED_TOL {
            return Err(MaError::NotClosed(defect));
        }
        if p.grid.mean(&p.background.iter().map(|g| g.det()).collect::<Vec<_>>()) <= 0.0 {
            return Err(MaError::BackgroundNotPositive(p.background_min_eigenvalue()));
        }
        Ok(p)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn theta(&self) -> &[CurvatureMatrix<Complex64>] {
        &self.theta
    }

    /// The target with its normalizing scale applied.
    pub fn eta(&self) -> Vec<f64> {
        self.eta.iter().map(|e| e * self.eta_scale).collect()
    }

    pub fn raw_eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn eta_scale(&self) -> f64 {
        self.eta_scale
    }

    /// `c₁/r` per node.
    pub fn background(&self) -> &[Hermitian2] {
        &self.background
    }

    pub fn background_min_eigenvalue(&self) -> f64 {
        self.background.iter().map(|g| g.min_eigenvalue()).fold(f64::INFINITY, f64::min)
    }

    /// Volume coefficient of `(2r c₂ − (r−1)c₁²)/2r`.
    pub fn kobayashi_lubke(&self) -> &[f64] {
        &self.kl
    }

    /// Volume coefficient of the right-hand side `η + (2r c₂ − (r−1)c₁²)/2r`.
    pub fn rhs(&self) -> Vec<f64> {
        self.eta.iter().zip(&self.kl).map(|(e, k)| e * self.eta_scale + k).collect()
    }

    /// `r(r+1)/2` times the volume coefficient of `(c₁/r)²`, whose mean the right side must match.
    pub fn target_mean(&self) -> f64 {
        let r = self.rank as f64;
        r * (r + 1.0) * self.grid.mean(&self.background.iter().map(|g| g.det()).collect::<Vec<_>>())
    }

    /// Largest violation of `d(c₁) = 0`, relative to the size of `c₁`, with
    /// derivatives taken spectrally.
    pub fn closedness_defect(&self) -> f64 {
        let g = &self.grid;
        let field = |f: &dyn Fn(&Hermitian2) -> f64| self.background.iter().map(f).collect::<Vec<_>>();
        let d1 = |v: &[f64]| g.gradient(v).0.into_iter();
        let d2 = |v: &[f64]| g.gradient(v).1.into_iter();
        let g11 = field(&|h| h.g11);
        let g22 = field(&|h| h.g22);
        let g12r = field(&|h| h.g12.re);
        let g12i = field(&|h| h.g12.im);
        let mut worst: f64 = 0.0;
        // ∂₁ g₂₁ = ∂₂ g₁₁ and ∂₁ g₂₂ = ∂₂ g₁₂, with g₂₁ = conj(g₁₂)
        for (a, b) in d1(&g12r).zip(d2(&g11)) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in d1(&g22).zip(d2(&g12r)) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in d1(&g12i).zip(d2(&g12i)) {
            // imaginary parts: ∂₁(−Im g₁₂) = 0 and ∂₂ Im g₁₂ = 0 separately
            worst = worst.max(a.abs()).max(b.abs());
        }
        let size = self.background.iter().map(|h| h.g11.abs() + h.g22.abs() + h.g12.norm()).fold(0.0, f64::max);
        worst / size.max(1.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Normalization {
    pub scale: f64,
    pub lhs_mean: f64,
    pub rhs_mean: f64,
    pub min_rhs: f64,
}

/// Rescales the target by the positive constant that makes the right side
/// integrate to `r(r+1)/2 ∫ (c₁/r)²`.
pub fn normalize_problem(raw: &MaProblem) -> Result<(MaProblem, Normalization), MaError> {
    let min_before = raw.rhs().into_iter().fold(f64::INFINITY, f64::min);
    if min_before.is_nan() || min_before <= 0.0 {
        return Err(MaError::HypothesisViolated(min_before));
    }
    let g = raw.grid();
    let eta_mean = g.mean(&raw.eta);
    let kl_mean = g.mean(&raw.kl);
    let target = raw.target_mean();
    let scale = (target - kl_mean) / eta_mean;
    if !scale.is_finite() || scale <= 0.0 {
        return Err(MaError::NotCompatible(scale));
    }
    let mut out = raw.clone();
    out.eta_scale = scale;
    let rhs = out.rhs();
    let min_rhs = rhs.iter().copied().fold(f64::INFINITY, f64::min);
    if min_rhs <= 0.0 {
        return Err(MaError::HypothesisViolated(min_rhs));
    }
    let norm = Normalization { scale, lhs_mean: target, rhs_mean: g.mean(&rhs), min_rhs };
    Ok((out, norm))
}

/// Curvature whose Chern form is `i Σ P dz ∧ dz̄` per block: `Θ = 2π P`.
fn theta_from_blocks(rank: usize, grid: &TorusGrid, p: impl Fn(f64, f64, usize, usize, usize, usize) -> Complex64) -> Vec<CurvatureMatrix<Complex64>> {
    (0..grid.len())
        .map(|k| {
            let (x, y) = grid.coords(k);
            CurvatureMatrix::from_raw(rank, 2, |a, b, i, j| p(x, y, a, b, i, j) * (2.0 * PI))
        })
        .collect()
}

const FLAT: [[f64; 2]; 2] = [[1.0, 0.2], [0.2, 1.5]];

/// Projectively flat data with `c₁/r` constant and the matching constant target: the zero potential solves it.
pub fn constant_fixture(rank: usize, m: usize) -> Result<MaProblem, MaError> {
    perturbed_fixture(rank, m, 0.0)
}

/// Constant curvature with right side `(1 + ε cos 2πx₁)` times the compatible constant.
pub fn perturbed_fixture(rank: usize, m: usize, eps: f64) -> Result<MaProblem, MaError> {
    let grid = TorusGrid::new(m)?;
    let theta = theta_from_blocks(rank, &grid, |_, _, a, b, i, j| if a == b { FLAT[i][j].into() } else { 0.0.into() });
    let r = rank as f64;
    let det = FLAT[0][0] * FLAT[1][1] - FLAT[0][1] * FLAT[1][0];
    let eta = grid.sample(|x, _| (1.0 + eps * (2.0 * PI * x).cos()) * r * (r + 1.0) * det);
    MaProblem::new(rank, grid, theta, eta)
}

/// Rank two data close to Hermite–Einstein: a constant Nakano-positive block
/// with a small traceless splitting and off-diagonal coupling, plus the
/// Hessian of a periodic potential on the diagonal. The target is raw and
/// needs normalizing.
pub fn he_rank2_fixture(m: usize) -> Result<MaProblem, MaError> {
    let grid = TorusGrid::new(m)?;
    let w = 2.0 * PI;
    let hess = |x: f64, y: f64| {
        // ψ = 0.3 cos(2πx₁) + 0.2 sin(2π(x₁+x₂))
        let s = -0.2 * w * w * (w * (x + y)).sin();
        let xx = -0.3 * w * w * (w * x).cos() + s;
        [[xx, s], [s, s]]
    };
    let coupling = [[Complex64::new(0.15, 0.0), Complex64::new(0.0, 0.075)], [Complex64::new(0.045, 0.0), Complex64::new(0.03, 0.0)]];
    let theta = theta_from_blocks(2, &grid, |x, y, a, b, i, j| {
        let h = hess(x, y)[i][j] / (8.0 * PI);
        match (a, b) {
            (0, 0) => (FLAT[i][j] + if i == j { 0.1 * if i == 0 { 1.0 } else { -1.0 } } else { 0.0 } + h).into(),
            (1, 1) => (FLAT[i][j] - if i == j { 0.1 * if i == 0 { 1.0 } else { -1.0 } } else { 0.0 } + h).into(),
            (0, 1) => coupling[i][j],
            _ => coupling[j][i].conj(),
        }
    });
    let eta = grid.sample(|_, y| 1.0 + 0.2 * (w * y).cos());
    MaProblem::new(2, grid, theta, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::FormValue;

    #[test]
    fn volume_form_has_unit_top_coefficient() {
        let v: FormValue<Complex64> = FormValue::volume(2);
        assert!((v.top_coefficient() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compatible_input_keeps_scale_one() {
        let p = perturbed_fixture(1, 8, 0.1).unwrap();
        let (n, rep) = normalize_problem(&p).unwrap();
        assert!((n.eta_scale() - 1.0).abs() < 1e-12, "{rep:?}");
    }

    #[test]
    fn doubled_target_recovers_half() {
        let p = perturbed_fixture(2, 8, 0.1).unwrap();
        let doubled = MaProblem::new(2, p.grid().clone(), p.theta().to_vec(), p.raw_eta().iter().map(|e| 2.0 * e).collect()).unwrap();
        let (n, _) = normalize_problem(&doubled).unwrap();
        assert!((n.eta_scale() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalized_integrals_match() {
        let p = he_rank2_fixture(16).unwrap();
        let (n, rep) = normalize_problem(&p).unwrap();
        assert!(((rep.rhs_mean - rep.lhs_mean) / rep.lhs_mean).abs() < 1e-12, "{rep:?}");
        assert!(n.rhs().iter().all(|f| *f > 0.0));
        assert!(n.closedness_defect() < 1e-10);
    }

    #[test]
    fn negative_right_side_is_rejected() {
        let p = perturbed_fixture(1, 8, 0.0).unwrap();
        let bad = MaProblem::new(1, p.grid().clone(), p.theta().to_vec(), p.grid().sample(|x, _| (2.0 * PI * x).cos())).unwrap();
        assert!(matches!(normalize_problem(&bad), Err(MaError::HypothesisViolated(_))));
    }

    #[test]
    fn open_first_chern_form_is_rejected() {
        let grid = TorusGrid::new(8).unwrap();
        let theta = theta_from_blocks(1, &grid, |x, _, _, _, i, j| match (i, j) {
            (1, 1) => (1.0 + 0.5 * (2.0 * PI * x).sin()).into(),
            (0, 0) => 1.0.into(),
            _ => 0.0.into(),
        });
        let eta = vec![1.0; grid.len()];
        assert!(matches!(MaProblem::new(1, grid, theta, eta), Err(MaError::NotClosed(_))));
    }
}
