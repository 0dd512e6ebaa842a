//! Local models on the cyclic cover `z_1 = w_1^N`: descending metrics, admissibility,
//! curvature transfer, cone metrics and the currents attached to parabolic line bundles.

use thiserror::Error;

use crate::forms::FormError;

mod ample_line;
mod bott_chern;
mod chart;
mod cone;
mod current;
mod curvature;
mod metric;

pub use ample_line::*;
pub use bott_chern::*;
pub use chart::*;
pub use cone::*;
pub use current::*;
pub use curvature::*;
pub use metric::*;

#[derive(Debug, Error)]
pub enum KawamataError {
    #[error("bad chart: {0}")]
    Chart(String),
    #[error("weight {0} is not a multiple of 1/{1}")]
    WeightNotOnCover(String, u32),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("cover data is not deck invariant (defect {0:e})")]
    InvarianceViolation(f64),
    #[error("metric is not positive definite (least eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("reference Kähler form is not positive definite")]
    ReferenceNotPositive,
    #[error("sampling grid too coarse: {0} annuli")]
    GridTooCoarse(usize),
    #[error("cannot rebase cover of degree {0}")]
    BadRebase(u32),
    #[error("cone exponent {0} outside [0, 2)")]
    ConeExponent(f64),
    #[error("metric is not admissible")]
    NotAdmissible,
    #[error("metric value must be positive")]
    NonPositiveMetric,
    #[error("analytic curvature is required")]
    MissingAnalyticCurvature,
    #[error(transparent)]
    Forms(#[from] FormError),
}
