use std::f64::consts::PI;

use serde::Serialize;

use super::grid::{Hessian, TorusGrid};
use super::problem::{Hermitian2, MaProblem};
use super::MaError;

/// `dd^c φ = (i/2π) ∂∂̄ φ`, and `∂_{z_j}∂_{z̄_k} = ¼ ∂_{x_j}∂_{x_k}` on data independent of the imaginary parts.
pub const HESSIAN_WEIGHT: f64 = 1.0 / (8.0 * PI);

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative residual asked of each linear solve.
    pub linear_tol: f64,
    pub restart: usize,
    pub max_linear: usize,
    /// Smallest damping factor tried before giving up on a step.
    pub min_damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, linear_tol: 1e-12, restart: 40, max_linear: 400, min_damping: 1.0 / 1024.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Sup-norm residual of every accepted iterate, starting with the initial guess.
    pub residuals: Vec<f64>,
    /// Accepted damping factor per step.
    pub damping: Vec<f64>,
    pub linear_iterations: Vec<usize>,
    /// Least eigenvalue of `ω_φ` over the grid, per accepted iterate.
    pub min_eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Largest relative drift of `∫ ω_φ²` from `∫ (c₁/r)²` over accepted iterates.
    pub conservation_defect: f64,
}

#[derive(Debug, Clone)]
pub struct MaSolution {
    pub phi: Vec<f64>,
    pub residual: Vec<f64>,
    pub omega: Vec<Hermitian2>,
    pub diagnostics: Diagnostics,
}

/// `ω_φ = c₁/r + dd^c φ` per node.
pub fn omega_phi(problem: &MaProblem, hess: &Hessian) -> Vec<Hermitian2> {
    problem
        .background()
        .iter()
        .enumerate()
        .map(|(k, g)| g.plus_real(HESSIAN_WEIGHT, hess.xx[k], hess.yy[k], hess.xy[k]))
        .collect()
}

/// Volume coefficient of `r(r+1)/2 ω_φ² − F`.
pub fn residual_of(problem: &MaProblem, omega: &[Hermitian2], rhs: &[f64]) -> Vec<f64> {
    let r = problem.rank() as f64;
    omega.iter().zip(rhs).map(|(g, f)| r * (r + 1.0) * g.det() - f).collect()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(grid: &TorusGrid, v: &mut [f64]) {
    let m = grid.mean(v);
    v.iter_mut().for_each(|x| *x -= m);
}

/// The linearized operator at `ω`, and its constant-coefficient approximation for preconditioning.
struct Linearization<'a> {
    grid: &'a TorusGrid,
    /// `(g₂₂, g₁₁, −2 Re g₁₂)` per node times `r(r+1)/8π`.
    coeffs: Vec<[f64; 3]>,
    mean: [f64; 3],
}

impl<'a> Linearization<'a> {
    fn new(grid: &'a TorusGrid, omega: &[Hermitian2], rank: usize) -> Self {
        let r = rank as f64;
        let s = r * (r + 1.0) * HESSIAN_WEIGHT;
        let coeffs: Vec<[f64; 3]> = omega.iter().map(|g| [s * g.g22, s * g.g11, -2.0 * s * g.g12.re]).collect();
        let mut mean = [0.0; 3];
        for c in &coeffs {
            for i in 0..3 {
                mean[i] += c[i];
            }
        }
        mean.iter_mut().for_each(|x| *x /= coeffs.len() as f64);
        Self { grid, coeffs, mean }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let h = self.grid.hessian(v);
        self.coeffs.iter().enumerate().map(|(k, c)| c[0] * h.xx[k] + c[1] * h.yy[k] + c[2] * h.xy[k]).collect()
    }

    fn precondition(&self, v: &[f64]) -> Vec<f64> {
        let [a, b, c] = self.mean;
        self.grid.apply_symbol(v, |k1, k2| {
            let sym = -(a * k1 * k1 + b * k2 * k2 + c * k1 * k2);
            if sym.abs() < 1e-300 {
                0.0
            } else {
                1.0 / sym
            }
        })
    }
}

/// Right-preconditioned restarted GMRES on mean-zero fields. Returns the
/// solution and the number of inner iterations.
fn gmres(lin: &Linearization, b: &[f64], cfg: &SolverConfig) -> (Vec<f64>, usize) {
    let n = b.len();
    let grid = lin.grid;
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return (x, 0);
    }
    let mut total = 0;
    while total < cfg.max_linear {
        let ax = lin.apply(&x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        remove_mean(grid, &mut r);
        let beta = dot(&r, &r).sqrt();
        if beta <= cfg.linear_tol * b_norm {
            break;
        }
        let m = cfg.restart;
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<f64>>()];
        let mut hess = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut steps = 0;
        for j in 0..m {
            let mut w = lin.apply(&lin.precondition(&basis[j]));
            remove_mean(grid, &mut w);
            for (i, q) in basis.iter().enumerate() {
                let hij = dot(&w, q);
                hess[i][j] = hij;
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= hij * b);
            }
            let norm = dot(&w, &w).sqrt();
            hess[j + 1][j] = norm;
            for i in 0..j {
                let t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = t;
            }
            let d = hess[j][j].hypot(hess[j + 1][j]);
            cs[j] = hess[j][j] / d;
            sn[j] = hess[j + 1][j] / d;
            hess[j][j] = d;
            hess[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            steps = j + 1;
            total += 1;
            if g[j + 1].abs() <= cfg.linear_tol * b_norm || norm == 0.0 || total >= cfg.max_linear {
                break;
            }
            basis.push(w.iter().map(|v| v / norm).collect());
        }
        let mut y = vec![0.0; steps];
        for i in (0..steps).rev() {
            let s: f64 = (i + 1..steps).map(|k| hess[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        let mut u = vec![0.0; n];
        for (yi, q) in y.iter().zip(&basis) {
            u.iter_mut().zip(q).for_each(|(a, b)| *a += yi * b);
        }
        let du = lin.precondition(&u);
        x.iter_mut().zip(&du).for_each(|(a, b)| *a += b);
        if g[steps].abs() <= cfg.linear_tol * b_norm {
            break;
        }
    }
    remove_mean(grid, &mut x);
    (x, total)
}

struct Iterate {
    phi: Vec<f64>,
    omega: Vec<Hermitian2>,
    residual: Vec<f64>,
    sup: f64,
    min_eig: f64,
}

fn evaluate(problem: &MaProblem, rhs: &[f64], phi: Vec<f64>) -> Iterate {
    let hess = problem.grid().hessian(&phi);
    let omega = omega_phi(problem, &hess);
    let residual = residual_of(problem, &omega, rhs);
    let min_eig = omega.iter().map(|g| g.min_eigenvalue()).fold(f64::INFINITY, f64::min);
    Iterate { sup: sup(&residual), phi, omega, residual, min_eig }
}

/// Solves `r(r+1)/2 (c₁/r + dd^c φ)² = F` for a mean-zero potential by damped
/// Newton steps. A step is accepted only if `ω_φ` stays positive at every
/// node and the sup-norm residual goes down.
pub fn solve(problem: &MaProblem, cfg: &SolverConfig) -> Result<MaSolution, MaError> {
    solve_from(problem, vec![0.0; problem.grid().len()], cfg)
}

pub fn solve_from(problem: &MaProblem, mut start: Vec<f64>, cfg: &SolverConfig) -> Result<MaSolution, MaError> {
    let grid = problem.grid();
    if start.len() != grid.len() {
        return Err(MaError::Shape(format!("initial potential has {} nodes, grid has {}", start.len(), grid.len())));
    }
    let rhs = problem.rhs();
    if let Some(f) = rhs.iter().copied().find(|f| !(*f > 0.0)) {
        return Err(MaError::HypothesisViolated(f));
    }
    remove_mean(grid, &mut start);
    let mut cur = evaluate(problem, &rhs, start);
    if cur.min_eig <= 0.0 {
        return Err(MaError::BackgroundNotPositive(cur.min_eig));
    }
    let reference: f64 = grid.mean(&problem.background().iter().map(|g| g.det()).collect::<Vec<_>>());
    let volume_drift = |it: &Iterate| (grid.mean(&it.omega.iter().map(|g| g.det()).collect::<Vec<_>>()) - reference).abs() / reference;
    let mut diag = Diagnostics {
        iterations: 0,
        residuals: vec![cur.sup],
        damping: Vec::new(),
        linear_iterations: Vec::new(),
        min_eigenvalues: vec![cur.min_eig],
        min_eigenvalue: cur.min_eig,
        conservation_defect: volume_drift(&cur),
    };
    while cur.sup >= cfg.tol {
        if diag.iterations >= cfg.max_iter {
            return Err(MaError::NotConverged { residual: cur.sup, iterations: diag.iterations });
        }
        let lin = Linearization::new(grid, &cur.omega, problem.rank());
        let mut b: Vec<f64> = cur.residual.iter().map(|x| -x).collect();
        remove_mean(grid, &mut b);
        let (step, inner) = gmres(&lin, &b, cfg);
        let mut t = 1.0;
        let next = loop {
            let trial: Vec<f64> = cur.phi.iter().zip(&step).map(|(p, d)| p + t * d).collect();
            let it = evaluate(problem, &rhs, trial);
            if it.min_eig > 0.0 && it.sup < cur.sup {
                break Some(it);
            }
            t *= 0.5;
            if t < cfg.min_damping {
                break None;
            }
        };
        let Some(next) = next else {
            return Err(MaError::Stalled { residual: cur.sup, iterations: diag.iterations });
        };
        cur = next;
        diag.iterations += 1;
        diag.damping.push(t);
        diag.linear_iterations.push(inner);
        diag.residuals.push(cur.sup);
        diag.min_eigenvalues.push(cur.min_eig);
        diag.min_eigenvalue = cur.min_eig;
        diag.conservation_defect = diag.conservation_defect.max(volume_drift(&cur));
    }
    Ok(MaSolution { phi: cur.phi, residual: cur.residual, omega: cur.omega, diagnostics: diag })
}

/// Sup-norm residual of the sampled exact potential on grids of the given
/// sizes, with the fitted algebraic order from the two finest grids.
#[derive(Debug, Clone, Serialize)]
pub struct RefinementStudy {
    pub sizes: Vec<usize>,
    pub residuals: Vec<f64>,
    pub order: f64,
}

pub fn manufactured_refinement(
    rank: usize,
    sizes: &[usize],
    background: Hermitian2,
    potential: impl Fn(f64, f64) -> f64,
    hessian: impl Fn(f64, f64) -> [f64; 3],
) -> Result<RefinementStudy, MaError> {
    let mut residuals = Vec::new();
    for &m in sizes {
        let p = manufactured_problem(rank, m, background, &hessian)?;
        let phi = p.grid().sample(&potential);
        let it = evaluate(&p, &p.rhs(), phi);
        residuals.push(it.sup);
    }
    let k = sizes.len();
    let order = if k >= 2 {
        (residuals[k - 2] / residuals[k - 1]).ln() / (sizes[k - 1] as f64 / sizes[k - 2] as f64).ln()
    } else {
        f64::NAN
    };
    Ok(RefinementStudy { sizes: sizes.to_vec(), residuals, order })
}

/// Constant background with the right side computed from an exact Hessian,
/// so that the given potential solves the continuum equation.
pub fn manufactured_problem(rank: usize, m: usize, background: Hermitian2, hessian: impl Fn(f64, f64) -> [f64; 3]) -> Result<MaProblem, MaError> {
    use crate::forms::CurvatureMatrix;
    use num_complex::Complex64;
    let grid = TorusGrid::new(m)?;
    let r = rank as f64;
    let g = [[Complex64::from(background.g11), background.g12], [background.g12.conj(), Complex64::from(background.g22)]];
    let theta = vec![CurvatureMatrix::from_raw(rank, 2, |a, b, i, j| if a == b { g[i][j] * (2.0 * PI) } else { Complex64::default() }); grid.len()];
    let eta = grid.sample(|x, y| {
        let [xx, yy, xy] = hessian(x, y);
        r * (r + 1.0) * background.plus_real(HESSIAN_WEIGHT, xx, yy, xy).det()
    });
    MaProblem::new(rank, grid, theta, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ma::problem::{constant_fixture, he_rank2_fixture, normalize_problem, perturbed_fixture};
    use num_complex::Complex64;

    #[test]
    fn constant_data_needs_no_iterations() {
        for r in 1..=3 {
            let p = constant_fixture(r, 16).unwrap();
            let s = solve(&p, &SolverConfig::default()).unwrap();
            assert_eq!(s.diagnostics.iterations, 0);
            assert!(s.phi.iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn cosine_perturbation_converges_at_64() {
        let p = perturbed_fixture(1, 64, 0.1).unwrap();
        let (p, _) = normalize_problem(&p).unwrap();
        let cfg = SolverConfig { tol: 1e-8, ..Default::default() };
        let s = solve(&p, &cfg).unwrap();
        let d = &s.diagnostics;
        assert!(*d.residuals.last().unwrap() < 1e-8, "{d:?}");
        assert!(d.residuals.windows(2).all(|w| w[1] < w[0]));
        assert!(d.conservation_defect < 1e-12, "{d:?}");
        assert!(d.min_eigenvalue > 0.0);
        assert!(s.phi.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn rank_two_synthetic_data_stay_positive() {
        let (p, _) = normalize_problem(&he_rank2_fixture(32).unwrap()).unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        assert!(s.diagnostics.min_eigenvalues.iter().all(|e| *e > 0.0));
        assert!(s.diagnostics.conservation_defect < 1e-12);
    }

    fn bump(x: f64, y: f64) -> f64 {
        0.05 * ((2.0 * PI * x).cos() + (2.0 * PI * y).sin()).exp()
    }

    fn bump_hessian(x: f64, y: f64) -> [f64; 3] {
        let w = 2.0 * PI;
        let (cx, sx, cy, sy) = ((w * x).cos(), (w * x).sin(), (w * y).cos(), (w * y).sin());
        let f = bump(x, y);
        // first derivatives of the exponent: (−w sx, w cy); second: (−w² cx, −w² sy)
        let (ux, uy) = (-w * sx, w * cy);
        [f * (ux * ux - w * w * cx), f * (uy * uy - w * w * sy), f * ux * uy]
    }

    const BACKGROUND: Hermitian2 = Hermitian2 { g11: 1.0, g22: 1.5, g12: Complex64 { re: 0.2, im: 0.1 } };

    #[test]
    fn interpolant_residual_decays_fast() {
        let study = manufactured_refinement(2, &[8, 12, 16], BACKGROUND, bump, bump_hessian).unwrap();
        assert!(study.order >= 2.0, "{study:?}");
        assert!(study.residuals.windows(2).all(|w| w[1] < w[0]), "{study:?}");
    }

    #[test]
    fn recovers_the_manufactured_potential() {
        let p = manufactured_problem(2, 32, BACKGROUND, bump_hessian).unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        let exact = p.grid().sample(bump);
        let mean = p.grid().mean(&exact);
        let err = s.phi.iter().zip(&exact).map(|(a, b)| (a - (b - mean)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn translated_data_give_translated_solution() {
        let p = he_rank2_fixture(16).unwrap();
        let (p, _) = normalize_problem(&p).unwrap();
        let g = p.grid();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        let shift = |v: &[f64]| g.translate(v, 3, 5);
        // node (i, j) of the shifted data holds node (i−3, j−5) of the original
        let mut moved = vec![p.theta()[0].clone(); g.len()];
        let m = g.size();
        for i in 0..m {
            for j in 0..m {
                moved[((i + 3) % m) * m + (j + 5) % m] = p.theta()[i * m + j].clone();
            }
        }
        let q = crate::ma::MaProblem::new(2, g.clone(), moved, shift(&p.eta())).unwrap();
        let t = solve(&q, &SolverConfig::default()).unwrap();
        let expected = shift(&s.phi);
        let dev = t.phi.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "{dev}");
    }

    #[test]
    fn invariant_data_give_invariant_solution() {
        let p = perturbed_fixture(2, 32, 0.2).unwrap();
        let s = solve(&p, &SolverConfig::default()).unwrap();
        let dev = s.phi.iter().zip(p.grid().translate(&s.phi, 0, 1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "{dev}");
    }
}
