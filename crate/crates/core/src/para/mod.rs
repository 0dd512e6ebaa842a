//! Exact algebra of parabolic structures on a curve: weights, filtrations,
//! functorial operations, parabolic degree and slope stability.

mod filtration;
mod model;
mod ops;
mod stability;
mod weight;

pub use filtration::{check_filtration_properties, my_filtration, FilterFunction, FiltrationReport, Jump};
pub use model::{ModelReadError, ParabolicModel, PointData};
pub use ops::{det, direct_sum, dual, par_degree, par_degree_integral_form, par_degree_sum_form, tensor};
pub use stability::{ample_degree_test, is_stable, slope, AmpleVerdict, StabilityVerdict};
pub use weight::{lcm_of_denominators, Weight};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParabolicError {
    #[error("weight {0} is outside [0, 1)")]
    WeightOutOfRange(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("rank must be positive")]
    ZeroRank,
    #[error("point {label:?} carries {found} weights but the rank is {rank}")]
    WrongWeightCount { label: String, found: usize, rank: usize },
    #[error("cover degree {given} does not match the lcm of the weight denominators ({expected})")]
    CoverDegreeMismatch { given: u64, expected: u64 },
    #[error("incompatible parabolic divisors: {0:?} vs {1:?}")]
    IncompatibleDivisors(Vec<String>, Vec<String>),
    #[error("candidate {index} has rank {candidate} which is not below the rank {rank}")]
    CandidateRankTooLarge { index: usize, candidate: usize, rank: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}
