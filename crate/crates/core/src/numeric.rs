//! Small numerical helpers shared by the geometric modules.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Sum in a fixed binary-tree order, so results do not depend on how work was split.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<usize, Vec<(f64, f64)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("cache lock").get(&points) {
        return v.clone();
    }
    let rule = GaussLegendre::new(points.max(2)).expect("at least two nodes");
    let mut nodes: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    cache.lock().expect("cache lock").insert(points, nodes.clone());
    nodes
}

/// Nodes and weights of the Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(points: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    gauss_legendre(points).into_iter().map(|(x, w)| (mid + half * x, half * w)).collect()
}

/// Integer power of a complex number, negative exponents allowed.
pub fn cpow(z: Complex64, k: i64) -> Complex64 {
    if k >= 0 {
        z.powu(k as u32)
    } else {
        z.powu((-k) as u32).inv()
    }
}

fn shifted(z: &[Complex64], i: usize, d: Complex64) -> Vec<Complex64> {
    let mut p = z.to_vec();
    p[i] += d;
    p
}

/// `∂f/∂z_i` of a real function by central differences with step `h`.
pub fn complex_gradient(f: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], h: f64) -> Vec<Complex64> {
    let re = Complex64::new(h, 0.0);
    let im = Complex64::new(0.0, h);
    (0..z.len())
        .map(|i| {
            let fx = (f(&shifted(z, i, re)) - f(&shifted(z, i, -re))) / (2.0 * h);
            let fy = (f(&shifted(z, i, im)) - f(&shifted(z, i, -im))) / (2.0 * h);
            Complex64::new(fx / 2.0, -fy / 2.0)
        })
        .collect()
}

/// The Levi matrix `∂²f/∂z_i∂z̄_j` of a real function by central differences.
pub fn levi_matrix(f: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], h: f64) -> DMatrix<Complex64> {
    let n = z.len();
    let dirs = |_: usize, k: usize| if k == 0 { Complex64::new(h, 0.0) } else { Complex64::new(0.0, h) };
    // second[(i,a),(j,b)] = ∂_{u_ia} ∂_{u_jb} f with u_i0 = x_i, u_i1 = y_i.
    let second = |i: usize, a: usize, j: usize, b: usize| -> f64 {
        if i == j && a == b {
            let d = dirs(i, a);
            (f(&shifted(z, i, d)) - 2.0 * f(z) + f(&shifted(z, i, -d))) / (h * h)
        } else {
            let (di, dj) = (dirs(i, a), dirs(j, b));
            let pp = f(&shifted(&shifted(z, i, di), j, dj));
            let pm = f(&shifted(&shifted(z, i, di), j, -dj));
            let mp = f(&shifted(&shifted(z, i, -di), j, dj));
            let mm = f(&shifted(&shifted(z, i, -di), j, -dj));
            (pp - pm - mp + mm) / (4.0 * h * h)
        }
    };
    DMatrix::from_fn(n, n, |i, j| {
        let re = second(i, 0, j, 0) + second(i, 1, j, 1);
        let im = second(i, 0, j, 1) - second(i, 1, j, 0);
        Complex64::new(re / 4.0, im / 4.0)
    })
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Least eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    sym.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
