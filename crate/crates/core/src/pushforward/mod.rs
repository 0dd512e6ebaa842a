//! Fiber integrals over projectivized fibers: the scalar closed form, a Monte
//! Carlo cross-check, and the exact push-forward of `1/(1 + c_1(O(1)))`.

use thiserror::Error;

use crate::forms::FormError;

mod monte_carlo;
mod quadrature;
mod symbolic;

pub use monte_carlo::*;
pub use quadrature::*;
pub use symbolic::*;

#[derive(Debug, Error)]
pub enum PushforwardError {
    #[error("unsupported size: base dimension {dim} (at most 3), rank {rank} (at most 4)")]
    Unsupported { dim: usize, rank: usize },
    #[error("all fiber parameters must be positive, got {0}")]
    NotPositive(f64),
    #[error("at least one fiber parameter is required")]
    Empty,
    #[error("quadrature did not converge: estimated error {estimate:e} above {tolerance:e}")]
    NotConverged { value: f64, estimate: f64, tolerance: f64 },
    #[error("Monte Carlo budget too small: standard error {achieved:e} above target {target:e}")]
    BudgetTooSmall { achieved: f64, target: f64 },
    #[error("matrix is singular or not unitary")]
    Singular,
    #[error(transparent)]
    Forms(#[from] FormError),
}
