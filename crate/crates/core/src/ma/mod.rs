//! Surface Monge–Ampère equation for a conformal change of a Hermitian metric
//! on the flat complex 2-torus, for data invariant along the imaginary
//! directions.

mod grid;
mod io;
mod problem;
mod solver;
mod verify;

pub use grid::{Hessian, TorusGrid};
pub use io::{read_problem, solution_csv, write_problem_csv, ProblemSpec};
pub use problem::{constant_fixture, he_rank2_fixture, normalize_problem, perturbed_fixture, Hermitian2, MaProblem, Normalization};
pub use solver::{
    manufactured_problem, manufactured_refinement, omega_phi, residual_of, solve, solve_from, Diagnostics, MaSolution,
    RefinementStudy, SolverConfig, HESSIAN_WEIGHT,
};
pub use verify::{conformal_curvature, verify_conclusion, ConclusionReport};

use thiserror::Error;

use crate::forms::FormError;

#[derive(Debug, Error)]
pub enum MaError {
    #[error("grid size {0} is too small")]
    GridSize(usize),
    #[error("bad shape: {0}")]
    Shape(String),
    #[error("first Chern form is not real (defect {0:.3e})")]
    NotReal(f64),
    #[error("first Chern form is not closed (defect {0:.3e})")]
    NotClosed(f64),
    #[error("background form is not positive (least eigenvalue {0:.3e})")]
    BackgroundNotPositive(f64),
    #[error("right-hand side is not positive (minimum {0:.3e})")]
    HypothesisViolated(f64),
    #[error("no positive rescaling of the target is compatible (scale {0:.3e})")]
    NotCompatible(f64),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { residual: f64, iterations: usize },
    #[error("line search failed after {iterations} iterations (residual {residual:.3e})")]
    Stalled { residual: f64, iterations: usize },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Forms(#[from] FormError),
}
