use std::collections::BTreeMap;

use super::coeff::Coeff;
use super::form::FormValue;

/// A polynomial in `z_1..z_n` and `z̄_1..z̄_n`; each key holds the exponents of
/// `z` then of `z̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZPolynomial<C> {
    dim: usize,
    terms: BTreeMap<(Vec<u32>, Vec<u32>), C>,
}

impl<C: Coeff> ZPolynomial<C> {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn with_term(mut self, z: &[u32], zb: &[u32], c: C) -> Self {
        assert!(z.len() == self.dim && zb.len() == self.dim);
        let e = self.terms.entry((z.to_vec(), zb.to_vec())).or_insert_with(C::zero);
        *e = e.clone() + c;
        self
    }

    fn eval_monomial(z: &[C], zb: &[C], ez: &[u32], ezb: &[u32]) -> C {
        let mut acc = C::one();
        for (x, &e) in z.iter().zip(ez) {
            for _ in 0..e {
                acc = acc * x.clone();
            }
        }
        for (x, &e) in zb.iter().zip(ezb) {
            for _ in 0..e {
                acc = acc * x.clone();
            }
        }
        acc
    }

    pub fn eval(&self, point: &[C]) -> C {
        let zb: Vec<C> = point.iter().map(C::conj).collect();
        self.terms
            .iter()
            .fold(C::zero(), |acc, ((ez, ezb), c)| acc + c.clone() * Self::eval_monomial(point, &zb, ez, ezb))
    }

    /// `∂²p / ∂z_i ∂z̄_j` at a point.
    pub fn mixed_derivative(&self, i: usize, j: usize, point: &[C]) -> C {
        let zb: Vec<C> = point.iter().map(C::conj).collect();
        let mut acc = C::zero();
        for ((ez, ezb), c) in &self.terms {
            if ez[i] == 0 || ezb[j] == 0 {
                continue;
            }
            let mut dz = ez.clone();
            let mut dzb = ezb.clone();
            let factor = C::from_ratio((ez[i] * ezb[j]) as i64, 1);
            dz[i] -= 1;
            dzb[j] -= 1;
            acc = acc + c.clone() * factor * Self::eval_monomial(point, &zb, &dz, &dzb);
        }
        acc
    }

    /// `dd^c p = (i/2π) ∂∂̄ p` at a point.
    pub fn dd_c(&self, point: &[C]) -> FormValue<C> {
        let n = self.dim;
        let coeffs: Vec<C> = (0..n * n).map(|ij| self.mixed_derivative(ij / n, ij % n, point)).collect();
        FormValue::from_11(n, &coeffs).scale(&C::chern_factor())
    }
}
