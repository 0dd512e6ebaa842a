use std::collections::BTreeMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::coeff::Coeff;
use super::form::FormValue;

/// A commutative algebra in which the Chern, Segre and Schur recursions can run.
///
/// Even-degree forms qualify, as do truncated polynomial rings used as formal
/// Chern roots in tests.
pub trait GradedAlgebra: Clone + Debug + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scale_ratio(&self, num: i64, den: i64) -> Self;
    fn is_zero_element(&self) -> bool;
    /// Largest `k` such that elements of degree `k` may be nonzero.
    fn top_degree(&self) -> usize;
}

impl<C: Coeff> GradedAlgebra for FormValue<C> {
    fn zero_like(&self) -> Self {
        FormValue::zero(self.dim())
    }

    fn one_like(&self) -> Self {
        FormValue::one(self.dim())
    }

    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }

    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }

    fn times(&self, other: &Self) -> Self {
        self.wedge(other)
    }

    fn scale_ratio(&self, num: i64, den: i64) -> Self {
        self.scale(&C::from_ratio(num, den))
    }

    fn is_zero_element(&self) -> bool {
        self.is_zero()
    }

    fn top_degree(&self) -> usize {
        self.dim()
    }
}

/// Polynomials over the rationals in commuting generators `u_1..u_m`, with
/// every monomial of total degree above `cap` set to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotentScalar {
    generators: usize,
    cap: usize,
    terms: BTreeMap<Vec<u8>, BigRational>,
}

impl NilpotentScalar {
    pub fn zero(generators: usize, cap: usize) -> Self {
        Self { generators, cap, terms: BTreeMap::new() }
    }

    pub fn constant(generators: usize, cap: usize, c: BigRational) -> Self {
        let mut s = Self::zero(generators, cap);
        s.add_term(vec![0; generators], c);
        s
    }

    pub fn generator(generators: usize, cap: usize, k: usize) -> Self {
        let mut e = vec![0u8; generators];
        e[k] = 1;
        let mut s = Self::zero(generators, cap);
        s.add_term(e, BigRational::one());
        s
    }

    pub fn from_terms(generators: usize, cap: usize, terms: impl IntoIterator<Item = (Vec<u8>, BigRational)>) -> Self {
        let mut s = Self::zero(generators, cap);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    fn add_term(&mut self, exps: Vec<u8>, c: BigRational) {
        assert_eq!(exps.len(), self.generators);
        if c.is_zero() || exps.iter().map(|&e| e as usize).sum::<usize>() > self.cap {
            return;
        }
        let entry = self.terms.entry(exps.clone()).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn coefficient(&self, exps: &[u8]) -> BigRational {
        self.terms.get(exps).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &BigRational)> {
        self.terms.iter()
    }
}

impl GradedAlgebra for NilpotentScalar {
    fn zero_like(&self) -> Self {
        Self::zero(self.generators, self.cap)
    }

    fn one_like(&self) -> Self {
        Self::constant(self.generators, self.cap, BigRational::one())
    }

    fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scale_ratio(-1, 1))
    }

    fn times(&self, other: &Self) -> Self {
        let mut out = self.zero_like();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    fn scale_ratio(&self, num: i64, den: i64) -> Self {
        let f = BigRational::new(BigInt::from(num), BigInt::from(den));
        let mut out = self.zero_like();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * &f);
        }
        out
    }

    fn is_zero_element(&self) -> bool {
        self.terms.is_empty()
    }

    fn top_degree(&self) -> usize {
        self.cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation() {
        let u = NilpotentScalar::generator(2, 2, 0);
        let v = NilpotentScalar::generator(2, 2, 1);
        let uv = u.times(&v);
        assert!(!uv.is_zero_element());
        assert!(uv.times(&u).is_zero_element());
        assert_eq!(u.plus(&v).times(&u.minus(&v)).coefficient(&[2, 0]), BigRational::one());
    }
}
