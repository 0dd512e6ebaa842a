use num_complex::Complex64;
use serde::Serialize;

use super::problem::{Hermitian2, MaProblem};
use crate::forms::{chern_forms, CurvatureMatrix, FormValue};

/// Pointwise positivity of the Chern forms of the conformally changed metric `G = H e^{−φ}`.
#[derive(Debug, Clone, Serialize)]
pub struct ConclusionReport {
    /// Least eigenvalue of `c₁(G)` over the grid.
    pub c1_margin: f64,
    /// Least volume coefficient of `c₂(G)`.
    pub c2_margin: f64,
    /// Least volume coefficient of `c₁²(G) − c₂(G)`.
    pub difference_margin: f64,
    /// Largest deviation of `c₁²(G) − c₂(G)` from the normalized target.
    pub target_deviation: f64,
    pub c1_positive: bool,
    pub c2_positive: bool,
    pub difference_positive: bool,
}

impl ConclusionReport {
    pub fn all_positive(&self) -> bool {
        self.c1_positive && self.c2_positive && self.difference_positive
    }
}

/// Curvature of `H e^{−φ}` at one node: `Θ_H + ∂∂̄φ · Id`.
pub fn conformal_curvature(theta: &CurvatureMatrix<Complex64>, hess: [f64; 3]) -> CurvatureMatrix<Complex64> {
    let [xx, yy, xy] = hess;
    let d = FormValue::from_11(2, &[(0.25 * xx).into(), (0.25 * xy).into(), (0.25 * xy).into(), (0.25 * yy).into()]);
    theta.add(&CurvatureMatrix::identity_twist(&d, theta.rank()))
}

pub fn verify_conclusion(phi: &[f64], problem: &MaProblem) -> ConclusionReport {
    let hess = problem.grid().hessian(phi);
    let eta = problem.eta();
    let mut rep = ConclusionReport {
        c1_margin: f64::INFINITY,
        c2_margin: f64::INFINITY,
        difference_margin: f64::INFINITY,
        target_deviation: 0.0,
        c1_positive: false,
        c2_positive: false,
        difference_positive: false,
    };
    for (k, theta) in problem.theta().iter().enumerate() {
        let tg = conformal_curvature(theta, [hess.xx[k], hess.yy[k], hess.xy[k]]);
        let c = chern_forms(&tg);
        let c1 = c.c(1);
        let minus_i = Complex64::new(0.0, -1.0);
        let g = Hermitian2 { g11: (c1.coeff_11(0, 0) * minus_i).re, g22: (c1.coeff_11(1, 1) * minus_i).re, g12: c1.coeff_11(0, 1) * minus_i };
        let c2 = c.c(2).top_coefficient().re;
        let diff = c1.wedge(&c1).top_coefficient().re - c2;
        rep.c1_margin = rep.c1_margin.min(g.min_eigenvalue());
        rep.c2_margin = rep.c2_margin.min(c2);
        rep.difference_margin = rep.difference_margin.min(diff);
        rep.target_deviation = rep.target_deviation.max((diff - eta[k]).abs());
    }
    rep.c1_positive = rep.c1_margin > 0.0;
    rep.c2_positive = rep.c2_margin > 0.0;
    rep.difference_positive = rep.difference_margin > 0.0;
    rep
}
