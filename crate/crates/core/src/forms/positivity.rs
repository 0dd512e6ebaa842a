use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::chern::{metric_curvature, CurvatureMatrix};
use super::coeff::Coeff;
use super::form::FormValue;
use super::FormError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Positive,
    Semipositive,
    Indefinite,
}

impl Verdict {
    pub fn from_margin(margin: f64, tol: f64) -> Self {
        if margin > tol {
            Self::Positive
        } else if margin >= -tol {
            Self::Semipositive
        } else {
            Self::Indefinite
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SamplingConfig {
    pub samples: usize,
    pub seed: u64,
    /// Margins within `±tol` count as semipositive.
    pub tol: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { samples: 512, seed: 0x5eed, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GriffithsReport {
    pub verdict: Verdict,
    /// Least value of `⟨Θ(v, v̄)s, s⟩_H` over unit `v` and `H`-unit `s`.
    pub margin: f64,
    pub v: Vec<Complex64>,
    pub s: Vec<Complex64>,
    pub directions: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct NakanoReport {
    pub verdict: Verdict,
    /// Least eigenvalue of the assembled `(nr)×(nr)` form relative to `Id ⊗ H`.
    pub margin: f64,
    pub eigenvector: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakPositivityReport {
    pub verdict: Verdict,
    /// Least ratio against the volume form.
    pub margin: f64,
    /// Largest imaginary part seen in a ratio; nonzero only for non-real input.
    pub imaginary_residue: f64,
    pub samples: usize,
    /// True when the test is a single exact comparison (top-degree input).
    pub exhaustive: bool,
}

/// Unit vectors: the coordinate axes followed by seeded Gaussian directions.
pub fn sample_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<Complex64>> = (0..dim.min(count))
        .map(|i| (0..dim).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect())
        .collect();
    while out.len() < count {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    out
}

/// Cholesky factor `L` of a Hermitian positive-definite matrix.
pub fn cholesky_lower(h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, FormError> {
    let defect = (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-10 * (1.0 + h.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
        return Err(FormError::MetricNotPositive("metric is not Hermitian".into()));
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let least = h.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(least > 1e-14 * scale) {
        return Err(FormError::MetricNotPositive(format!("metric is not positive-definite (least eigenvalue {least:.3e})")));
    }
    h.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| FormError::MetricNotPositive("metric is not positive-definite".into()))
}

/// Least eigenvalue of `Q` relative to `L L^*`, with an eigenvector normalized in that metric.
pub fn least_relative_eigen(q: &DMatrix<Complex64>, l: &DMatrix<Complex64>) -> (f64, Vec<Complex64>) {
    let l_inv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    let m = &l_inv * q * l_inv.adjoint();
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = m.symmetric_eigen();
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, &x)| if x < best.1 { (k, x) } else { best });
    let y = eig.eigenvectors.column(k).into_owned();
    let s = l_inv.adjoint() * y;
    (lambda, s.iter().copied().collect())
}

fn metric_matrix(h: Option<&[Complex64]>, r: usize) -> Result<DMatrix<Complex64>, FormError> {
    match h {
        None => Ok(DMatrix::identity(r, r)),
        Some(h) if h.len() == r * r => Ok(DMatrix::from_row_slice(r, r, h)),
        Some(h) => Err(FormError::Shape(format!("metric has {} entries for rank {r}", h.len()))),
    }
}

fn check_symmetry<C: Coeff>(theta: &CurvatureMatrix<C>, h: Option<&[Complex64]>) -> Result<(), FormError> {
    let scale = theta.entries().iter().map(|e| e.max_abs()).fold(1.0, f64::max);
    let defect = theta.hermitian_defect(h);
    if defect > 1e-9 * scale {
        return Err(FormError::NotHermitian(defect));
    }
    Ok(())
}

/// Griffiths positivity: samples directions `v` and minimizes exactly over `s`.
pub fn griffiths_test<C: Coeff>(
    theta: &CurvatureMatrix<C>,
    h: Option<&[Complex64]>,
    config: &SamplingConfig,
) -> Result<GriffithsReport, FormError> {
    let (r, n) = (theta.rank(), theta.dim());
    let hm = metric_matrix(h, r)?;
    let l = cholesky_lower(&hm)?;
    check_symmetry(theta, h)?;
    let m = metric_curvature(theta, h);
    let mut raw = vec![Complex64::new(0.0, 0.0); r * r * n * n];
    for a in 0..r {
        for b in 0..r {
            for i in 0..n {
                for j in 0..n {
                    raw[((a * r + b) * n + i) * n + j] = m(a, b, i, j);
                }
            }
        }
    }
    let directions = sample_directions(n, config.samples.max(n), config.seed);
    let results: Vec<(usize, f64, Vec<Complex64>)> = directions
        .par_iter()
        .enumerate()
        .map(|(k, v)| {
            let q = DMatrix::from_fn(r, r, |a, b| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += raw[((a * r + b) * n + i) * n + j] * v[i] * v[j].conj();
                    }
                }
                acc
            });
            let (lambda, s) = least_relative_eigen(&q, &l);
            (k, lambda, s)
        })
        .collect();
    let (k, margin, s) = results
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
        .expect("at least one direction");
    Ok(GriffithsReport {
        verdict: Verdict::from_margin(margin, config.tol),
        margin,
        v: directions[k].clone(),
        s,
        directions: directions.len(),
    })
}

/// The Hermitian form `s ↦ ⟨Θ(v, v̄)s, s⟩_H` as an `r×r` matrix.
pub fn griffiths_form_matrix<C: Coeff>(theta: &CurvatureMatrix<C>, h: Option<&[Complex64]>, v: &[Complex64]) -> DMatrix<Complex64> {
    let (r, n) = (theta.rank(), theta.dim());
    let m = metric_curvature(theta, h);
    DMatrix::from_fn(r, r, |a, b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += m(a, b, i, j) * v[i] * v[j].conj();
            }
        }
        acc
    })
}

/// Least Griffiths ratio against a Kähler form `ω = i Σ g_{ij} dz_i ∧ dz̄_j`
/// over the given directions: the largest `C` with `Θ ≥ C ω` on them.
pub fn griffiths_margin_against<C: Coeff>(
    theta: &CurvatureMatrix<C>,
    h: Option<&[Complex64]>,
    omega: &DMatrix<Complex64>,
    directions: &[Vec<Complex64>],
) -> Result<f64, FormError> {
    let (r, n) = (theta.rank(), theta.dim());
    if omega.nrows() != n || omega.ncols() != n {
        return Err(FormError::Shape(format!("{}×{} Kähler matrix in dimension {n}", omega.nrows(), omega.ncols())));
    }
    let l = cholesky_lower(&metric_matrix(h, r)?)?;
    check_symmetry(theta, h)?;
    let mut best = f64::INFINITY;
    for v in directions {
        let mut len = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                len += omega[(i, j)] * v[i] * v[j].conj();
            }
        }
        let q = griffiths_form_matrix(theta, h, v);
        best = best.min(least_relative_eigen(&q, &l).0 / len.re);
    }
    Ok(best)
}

/// Nakano positivity: a dense eigenvalue problem on `T ⊗ E`, no sampling.
pub fn nakano_test<C: Coeff>(
    theta: &CurvatureMatrix<C>,
    h: Option<&[Complex64]>,
    tol: f64,
) -> Result<NakanoReport, FormError> {
    let (r, n) = (theta.rank(), theta.dim());
    let hm = metric_matrix(h, r)?;
    cholesky_lower(&hm)?;
    check_symmetry(theta, h)?;
    let m = metric_curvature(theta, h);
    let big = DMatrix::from_fn(n * r, n * r, |x, y| m(x % r, y % r, x / r, y / r));
    let metric = DMatrix::from_fn(n * r, n * r, |x, y| if x / r == y / r { hm[(x % r, y % r)] } else { Complex64::new(0.0, 0.0) });
    let l = cholesky_lower(&metric)?;
    let (margin, eigenvector) = least_relative_eigen(&big, &l);
    Ok(NakanoReport { verdict: Verdict::from_margin(margin, tol), margin, eigenvector })
}

/// Weak positivity of a `(k,k)`-form: its wedge with `n-k` sampled forms
/// `i ξ ∧ ξ̄` is compared with the volume form.
pub fn weak_positivity_test<C: Coeff>(
    eta: &FormValue<C>,
    config: &SamplingConfig,
) -> Result<WeakPositivityReport, FormError> {
    let n = eta.dim();
    let eta = eta.to_c64();
    let k = match eta.bidegree() {
        Some((p, q)) if p == q => p,
        Some(b) => return Err(FormError::WrongBidegree { expected: (b.0.max(b.1), b.0.max(b.1)), found: b }),
        None if eta.is_zero() => n,
        None => return Err(FormError::WrongBidegree { expected: (0, 0), found: (usize::MAX, usize::MAX) }),
    };
    let vol = FormValue::<Complex64>::volume(n).top_coefficient();
    let ratio = |f: &FormValue<Complex64>| f.top_coefficient() / vol;
    if k == n {
        let z = ratio(&eta);
        return Ok(WeakPositivityReport {
            verdict: Verdict::from_margin(z.re, config.tol),
            margin: z.re,
            imaginary_residue: z.im.abs(),
            samples: 1,
            exhaustive: true,
        });
    }
    let m = n - k;
    let dirs = sample_directions(n, config.samples * m, config.seed);
    let values: Vec<Complex64> = (0..config.samples)
        .into_par_iter()
        .map(|t| {
            let mut acc = eta.clone();
            for xi in &dirs[t * m..(t + 1) * m] {
                let coeffs: Vec<Complex64> = (0..n * n)
                    .map(|ij| Complex64::i() * xi[ij / n] * xi[ij % n].conj())
                    .collect();
                acc = acc.wedge(&FormValue::from_11(n, &coeffs));
            }
            ratio(&acc)
        })
        .collect();
    let margin = values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let imaginary_residue = values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(WeakPositivityReport {
        verdict: Verdict::from_margin(margin, config.tol),
        margin,
        imaginary_residue,
        samples: config.samples,
        exhaustive: false,
    })
}

/// The curvature used to separate the two positivity notions: rank 2 on a
/// surface, `M = Id - t·P` on `T ⊗ E` with `P` the projection onto
/// `(e_1⊗f_2 - e_2⊗f_1)/√2`. Griffiths margin `1 - t/2`, Nakano margin `1 - t`.
pub fn griffiths_not_nakano(t: f64) -> CurvatureMatrix<Complex64> {
    let tau = |i: usize, a: usize| -> f64 {
        match (i, a) {
            (0, 1) => std::f64::consts::FRAC_1_SQRT_2,
            (1, 0) => -std::f64::consts::FRAC_1_SQRT_2,
            _ => 0.0,
        }
    };
    CurvatureMatrix::from_raw(2, 2, |a, b, i, j| {
        let id = if a == b && i == j { 1.0 } else { 0.0 };
        Complex64::new(id - t * tau(i, a) * tau(j, b), 0.0)
    })
}
