//! Pointwise exterior algebra of `(p,q)`-forms, characteristic forms of
//! curvature matrices and positivity tests.

mod algebra;
mod chern;
mod coeff;
mod ddc;
mod form;
mod positivity;

pub use algebra::{GradedAlgebra, NilpotentScalar};
pub use chern::{
    chern_forms, elementary_symmetric, forms_close, kobayashi_lubke_rhs, schur_form, segre_forms, ChernData,
    CurvatureMatrix,
};
pub use coeff::{exact_height, Coeff, ExactCoeff};
pub use ddc::ZPolynomial;
pub use form::{wedge_sign, FormValue, Monomial};
pub use positivity::{
    cholesky_lower, griffiths_form_matrix, griffiths_margin_against, griffiths_not_nakano, griffiths_test, least_relative_eigen, nakano_test, sample_directions,
    weak_positivity_test, GriffithsReport, NakanoReport, SamplingConfig, Verdict, WeakPositivityReport,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("expected bidegree {expected:?}, found {found:?}")]
    WrongBidegree { expected: (usize, usize), found: (usize, usize) },
    #[error("bad shape: {0}")]
    Shape(String),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("this operation needs a surface, got dimension {0}")]
    NotASurface(usize),
    #[error("{0}")]
    MetricNotPositive(String),
    #[error("curvature is not Hermitian with respect to the metric (defect {0:.3e})")]
    NotHermitian(f64),
    #[error("form JSON: {0}")]
    Json(String),
}
