use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};

use super::ParabolicError;

/// A parabolic weight: a rational number in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Rational64);

impl Weight {
    pub const ZERO: Weight = Weight(Rational64::new_raw(0, 1));

    pub fn new(value: Rational64) -> Result<Self, ParabolicError> {
        if value < Rational64::zero() || value >= Rational64::one() {
            return Err(ParabolicError::WeightOutOfRange(value.to_string()));
        }
        Ok(Self(value))
    }

    pub fn from_fraction(num: i64, den: i64) -> Result<Self, ParabolicError> {
        if den == 0 {
            return Err(ParabolicError::Parse(format!("zero denominator in {num}/{den}")));
        }
        Self::new(Rational64::new(num, den))
    }

    /// The fractional part of an arbitrary rational, as a weight.
    pub fn fract_of(value: Rational64) -> Self {
        Self(value - value.floor())
    }

    pub fn value(self) -> Rational64 {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    /// Weight of the dual flag quotient: `1 - a` for `a > 0`, and `0` for `0`.
    pub fn dual(self) -> Self {
        if self.is_zero() {
            self
        } else {
            Self(Rational64::one() - self.0)
        }
    }

    /// The integer Γ-weight `N·a` on an `N`-fold cover, if `N` is a multiple of the denominator.
    pub fn cover_weight(self, cover_degree: u64) -> Option<i64> {
        let n = cover_degree as i64;
        if n % self.denom() != 0 {
            return None;
        }
        Some(self.numer() * (n / self.denom()))
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Weight {
    type Err = ParabolicError;

    /// Accepts `"a/N"` in lowest terms, or a bare integer (only `"0"` is in range).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => {
                let a: i64 = a
                    .trim()
                    .parse()
                    .map_err(|_| ParabolicError::Parse(format!("bad numerator in weight {s:?}")))?;
                let b: i64 = b
                    .trim()
                    .parse()
                    .map_err(|_| ParabolicError::Parse(format!("bad denominator in weight {s:?}")))?;
                (a, b)
            }
            None => {
                let a: i64 = s
                    .parse()
                    .map_err(|_| ParabolicError::Parse(format!("bad weight {s:?}")))?;
                (a, 1)
            }
        };
        if den <= 0 {
            return Err(ParabolicError::Parse(format!("non-positive denominator in weight {s:?}")));
        }
        if num.gcd(&den) != 1 && num != 0 {
            return Err(ParabolicError::Parse(format!("weight {s:?} is not in lowest terms")));
        }
        if num == 0 && den != 1 {
            return Err(ParabolicError::Parse(format!("weight {s:?} is not in lowest terms")));
        }
        Self::new(Rational64::new(num, den))
    }
}

/// Least common multiple of the denominators of a collection of weights (1 if empty).
pub fn lcm_of_denominators<'a>(weights: impl IntoIterator<Item = &'a Weight>) -> u64 {
    weights
        .into_iter()
        .fold(1i64, |acc, w| acc.lcm(&w.denom())) as u64
}
