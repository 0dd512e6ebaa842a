use num_rational::Rational64;
use num_traits::Zero;

use super::model::ParabolicModel;
use super::ops::par_degree;
use super::ParabolicError;

pub fn slope(model: &ParabolicModel) -> Rational64 {
    par_degree(model) / Rational64::from_integer(model.rank() as i64)
}

/// Stability relative to a list of candidate subsheaves supplied by the caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable,
    /// Some candidate has slope equal to the bundle's, none exceeds it.
    Semistable { witness: usize },
    /// The candidate at `witness` has the largest slope, which exceeds the bundle's.
    Unstable { witness: usize },
}

impl StabilityVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Semistable { .. } => "semistable",
            Self::Unstable { .. } => "unstable",
        }
    }
}

/// Compares `slope(F)` with `slope(E)` for every candidate `F`; `E` is stable
/// against the list when every inequality `slope(F) < slope(E)` is strict.
pub fn is_stable(model: &ParabolicModel, candidates: &[ParabolicModel]) -> Result<StabilityVerdict, ParabolicError> {
    let mu = slope(model);
    let mut worst: Option<(usize, Rational64)> = None;
    for (index, f) in candidates.iter().enumerate() {
        if f.rank() >= model.rank() {
            return Err(ParabolicError::CandidateRankTooLarge { index, candidate: f.rank(), rank: model.rank() });
        }
        let s = slope(f);
        if worst.is_none_or(|(_, w)| s > w) {
            worst = Some((index, s));
        }
    }
    Ok(match worst {
        Some((witness, s)) if s > mu => StabilityVerdict::Unstable { witness },
        Some((witness, s)) if s == mu => StabilityVerdict::Semistable { witness },
        _ => StabilityVerdict::Stable,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmpleVerdict {
    pub ample: bool,
    /// Parabolic degree of each summand.
    pub degrees: Vec<Rational64>,
    /// First summand with non-positive parabolic degree.
    pub witness: Option<usize>,
}

/// Ampleness of a direct sum of parabolic lines: every summand needs positive
/// parabolic degree.
pub fn ample_degree_test(summands: &[ParabolicModel]) -> Result<AmpleVerdict, ParabolicError> {
    if summands.is_empty() {
        return Err(ParabolicError::Unsupported("no summands given".into()));
    }
    if let Some(m) = summands.iter().find(|m| m.rank() != 1) {
        return Err(ParabolicError::Unsupported(format!(
            "ampleness is only decided for sums of lines, got a summand of rank {}",
            m.rank()
        )));
    }
    let degrees: Vec<Rational64> = summands.iter().map(par_degree).collect();
    let witness = degrees.iter().position(|d| *d <= Rational64::zero());
    Ok(AmpleVerdict { ample: witness.is_none(), degrees, witness })
}
