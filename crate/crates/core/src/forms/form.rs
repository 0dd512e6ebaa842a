use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use super::coeff::Coeff;
use super::FormError;

/// `dz^I ∧ dz̄^J` with `I`, `J` stored as bitmasks over `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub dz: u32,
    pub dzb: u32,
}

impl Monomial {
    pub fn new(dz: &[usize], dzb: &[usize]) -> Self {
        Self { dz: mask(dz), dzb: mask(dzb) }
    }

    pub fn bidegree(self) -> (usize, usize) {
        (self.dz.count_ones() as usize, self.dzb.count_ones() as usize)
    }

    pub fn degree(self) -> usize {
        let (p, q) = self.bidegree();
        p + q
    }

    pub fn dz_indices(self) -> Vec<usize> {
        indices(self.dz)
    }

    pub fn dzb_indices(self) -> Vec<usize> {
        indices(self.dzb)
    }
}

fn mask(ix: &[usize]) -> u32 {
    ix.iter().fold(0, |m, &i| m | (1 << i))
}

fn indices(m: u32) -> Vec<usize> {
    (0..32).filter(|i| m & (1 << i) != 0).collect()
}

/// Number of pairs `(x, y)` with `x` in `a`, `y` in `b` and `x > y`.
fn crossings(a: u32, b: u32) -> u32 {
    let mut n = 0;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        rest &= rest - 1;
        n += (a & !((2u32 << y) - 1)).count_ones();
    }
    n
}

/// Sign of `(dz^{I1} dz̄^{J1}) ∧ (dz^{I2} dz̄^{J2})` in canonical order, or
/// `None` when the product vanishes.
pub fn wedge_sign(a: Monomial, b: Monomial) -> Option<(Monomial, bool)> {
    if a.dz & b.dz != 0 || a.dzb & b.dzb != 0 {
        return None;
    }
    let swaps = a.dzb.count_ones() * b.dz.count_ones() + crossings(a.dz, b.dz) + crossings(a.dzb, b.dzb);
    Some((Monomial { dz: a.dz | b.dz, dzb: a.dzb | b.dzb }, swaps % 2 == 1))
}

/// An element of the exterior algebra over `dz_1..dz_n, dz̄_1..dz̄_n` at a
/// point, stored in canonical order `dz^I ∧ dz̄^J` with ascending indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FormValue<C> {
    dim: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> FormValue<C> {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= 16, "dimension {dim} is too large");
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, c: C) -> Self {
        let mut f = Self::zero(dim);
        f.add_term(Monomial { dz: 0, dzb: 0 }, c);
        f
    }

    pub fn one(dim: usize) -> Self {
        Self::scalar(dim, C::one())
    }

    /// `c · dz_{i_1} ∧ … ∧ dz̄_{j_1} ∧ …` with indices in any order; the sign is
    /// normalized to canonical order and repeated indices give zero.
    pub fn term(dim: usize, dz: &[usize], dzb: &[usize], c: C) -> Self {
        let mut f = Self::scalar(dim, c);
        for &i in dz {
            f = f.wedge_unchecked(&Self::scalar_term(dim, Monomial { dz: 1 << i, dzb: 0 }));
        }
        for &j in dzb {
            f = f.wedge_unchecked(&Self::scalar_term(dim, Monomial { dz: 0, dzb: 1 << j }));
        }
        f
    }

    fn scalar_term(dim: usize, m: Monomial) -> Self {
        let mut f = Self::zero(dim);
        f.add_term(m, C::one());
        f
    }

    pub fn dz(dim: usize, i: usize) -> Self {
        Self::term(dim, &[i], &[], C::one())
    }

    pub fn dzb(dim: usize, i: usize) -> Self {
        Self::term(dim, &[], &[i], C::one())
    }

    /// `Σ c_{ij} dz_i ∧ dz̄_j` from a row-major `n×n` coefficient array.
    pub fn from_11(dim: usize, coeffs: &[C]) -> Self {
        assert_eq!(coeffs.len(), dim * dim);
        let mut f = Self::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                f.add_term(Monomial { dz: 1 << i, dzb: 1 << j }, coeffs[i * dim + j].clone());
            }
        }
        f
    }

    /// `∏_k (i dz_k ∧ dz̄_k)`.
    pub fn volume(dim: usize) -> Self {
        (0..dim).fold(Self::one(dim), |acc, k| {
            acc.wedge_unchecked(&Self::term(dim, &[k], &[k], C::imag_unit()))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: Monomial) -> C {
        self.terms.get(&m).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient of `dz_i ∧ dz̄_j`.
    pub fn coeff_11(&self, i: usize, j: usize) -> C {
        self.coefficient(Monomial { dz: 1 << i, dzb: 1 << j })
    }

    /// Coefficient of `dz_1…dz_n ∧ dz̄_1…dz̄_n`.
    pub fn top_coefficient(&self) -> C {
        let full = (1u32 << self.dim) - 1;
        self.coefficient(Monomial { dz: full, dzb: full })
    }

    pub fn scalar_part(&self) -> C {
        self.coefficient(Monomial { dz: 0, dzb: 0 })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn check_dim(&self, other: &Self) -> Result<(), FormError> {
        if self.dim != other.dim {
            return Err(FormError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FormError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn try_wedge(&self, other: &Self) -> Result<Self, FormError> {
        self.check_dim(other)?;
        Ok(self.wedge_unchecked(other))
    }

    /// Panicking wrappers for internal use where dimensions agree by construction.
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("form dimensions agree")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn wedge(&self, other: &Self) -> Self {
        self.try_wedge(other).expect("form dimensions agree")
    }

    fn wedge_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, negative)) = wedge_sign(*ma, *mb) {
                    let c = ca.clone() * cb.clone();
                    out.add_term(m, if negative { -c } else { c });
                }
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { dim: self.dim, terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, x) in &self.terms {
            out.add_term(*m, x.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.dim), |acc, _| acc.wedge_unchecked(self))
    }

    /// Complex conjugate: `conj(f dz^I dz̄^J) = conj(f) dz̄^I dz^J`, reordered.
    pub fn conj_form(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            let (p, q) = m.bidegree();
            let c = c.conj();
            out.add_term(Monomial { dz: m.dzb, dzb: m.dz }, if (p * q) % 2 == 1 { -c } else { c });
        }
        out
    }

    /// Component of bidegree `(p, q)`.
    pub fn bidegree_part(&self, p: usize, q: usize) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().filter(|(m, _)| m.bidegree() == (p, q)).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// Component of total degree `k`.
    pub fn degree_part(&self, k: usize) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == k).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// The common bidegree of all terms, if homogeneous and nonzero.
    pub fn bidegree(&self) -> Option<(usize, usize)> {
        let mut it = self.terms.keys().map(|m| m.bidegree());
        let first = it.next()?;
        it.all(|b| b == first).then_some(first)
    }

    pub fn to_c64(&self) -> FormValue<Complex64> {
        let mut out = FormValue::zero(self.dim);
        for (m, c) in &self.terms {
            out.add_term(*m, c.to_c64());
        }
        out
    }

    /// Largest coefficient modulus, after conversion to floating point.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_c64().norm()).fold(0.0, f64::max)
    }

    /// JSON list of `{"I": [...], "J": [...], ...coefficient fields}` with 1-based indices.
    pub fn to_json(&self) -> Value {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            for mut fields in c.json_fields() {
                let i: Vec<usize> = m.dz_indices().iter().map(|x| x + 1).collect();
                let j: Vec<usize> = m.dzb_indices().iter().map(|x| x + 1).collect();
                let mut obj = Map::new();
                obj.insert("I".into(), json!(i));
                obj.insert("J".into(), json!(j));
                obj.append(&mut fields);
                out.push(Value::Object(obj));
            }
        }
        Value::Array(out)
    }

    pub fn from_json(dim: usize, value: &Value) -> Result<Self, FormError> {
        let items = value.as_array().ok_or_else(|| FormError::Json("form must be a JSON list".into()))?;
        let mut out = Self::zero(dim);
        for (pos, item) in items.iter().enumerate() {
            let obj = item.as_object().ok_or_else(|| FormError::Json(format!("entry {pos} is not an object")))?;
            let read_ix = |key: &str| -> Result<Vec<usize>, FormError> {
                let arr = obj
                    .get(key)
                    .and_then(Value::as_array)
                    .ok_or_else(|| FormError::Json(format!("entry {pos}: missing index list {key:?}")))?;
                arr.iter()
                    .map(|v| match v.as_u64() {
                        Some(k) if k >= 1 && (k as usize) <= dim => Ok(k as usize - 1),
                        _ => Err(FormError::Json(format!("entry {pos}: index {v} out of range 1..={dim}"))),
                    })
                    .collect()
            };
            let (i, j) = (read_ix("I")?, read_ix("J")?);
            let c = C::from_json_fields(obj)?;
            out = out.add(&Self::term(dim, &i, &j, c));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::coeff::ExactCoeff;

    type F = FormValue<Complex64>;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Sign of the permutation sorting a sequence of distinct integers.
    fn perm_sign(seq: &[i32]) -> i32 {
        let mut s = 1;
        for a in 0..seq.len() {
            for b in a + 1..seq.len() {
                if seq[a] > seq[b] {
                    s = -s;
                }
            }
        }
        s
    }

    #[test]
    fn wedge_sign_against_permutation_oracle() {
        // Generators ordered dz_0 < dz_1 < ... < dz̄_0 < dz̄_1 < ... encode the canonical order.
        let n = 3;
        let key = |m: Monomial| -> Vec<i32> {
            let mut v: Vec<i32> = m.dz_indices().iter().map(|&i| i as i32).collect();
            v.extend(m.dzb_indices().iter().map(|&j| (n + j) as i32));
            v
        };
        for a in 0..(1u32 << (2 * n)) {
            for b in 0..(1u32 << (2 * n)) {
                let ma = Monomial { dz: a & 7, dzb: a >> 3 };
                let mb = Monomial { dz: b & 7, dzb: b >> 3 };
                let mut seq = key(ma);
                seq.extend(key(mb));
                let mut sorted = seq.clone();
                sorted.sort();
                sorted.dedup();
                match wedge_sign(ma, mb) {
                    None => assert!(sorted.len() < seq.len()),
                    Some((m, neg)) => {
                        assert_eq!(key(m), sorted);
                        assert_eq!(if neg { -1 } else { 1 }, perm_sign(&seq));
                    }
                }
            }
        }
    }

    #[test]
    fn block_product_sign() {
        let a = F::term(2, &[0], &[0], c(1.0, 0.0));
        let b = F::term(2, &[1], &[1], c(1.0, 0.0));
        let p = a.wedge(&b);
        assert_eq!(p.top_coefficient(), c(-1.0, 0.0));
        assert_eq!(F::volume(2).top_coefficient(), c(1.0, 0.0));
        assert_eq!(F::volume(3).top_coefficient(), c(0.0, 1.0));
    }

    #[test]
    fn unit_and_commutation() {
        let a = F::from_11(2, &[c(1.0, 2.0), c(0.5, 0.0), c(-3.0, 1.0), c(0.0, 4.0)]);
        let b = F::from_11(2, &[c(2.0, 0.0), c(1.0, -1.0), c(0.0, 0.0), c(1.0, 1.0)]);
        assert_eq!(a.wedge(&F::one(2)), a);
        assert_eq!(a.wedge(&b), b.wedge(&a));
        let x = F::dz(2, 0);
        assert_eq!(x.wedge(&F::dz(2, 1)), F::dz(2, 1).wedge(&x).neg());
        assert!(x.wedge(&x).is_zero());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(F::one(2).try_wedge(&F::one(3)), Err(FormError::DimensionMismatch(2, 3))));
    }

    #[test]
    fn conjugation_of_real_forms() {
        let w = F::term(1, &[0], &[0], c(0.0, 1.0));
        assert_eq!(w.conj_form(), w);
        assert_eq!(F::volume(2).conj_form(), F::volume(2));
    }

    #[test]
    fn json_round_trip() {
        let a = F::term(3, &[2, 0], &[1], c(1.5, -2.0));
        let v = a.to_json();
        assert_eq!(v[0]["I"], json!([1, 3]));
        assert_eq!(F::from_json(3, &v).unwrap(), a);
        let e = FormValue::<ExactCoeff>::term(2, &[0], &[1], ExactCoeff::chern_factor());
        assert_eq!(e.to_json()[0]["tau"], json!(1));
        assert_eq!(FormValue::<ExactCoeff>::from_json(2, &e.to_json()).unwrap(), e);
        assert!(F::from_json(2, &json!([{"I": [3], "J": [], "re": 1.0}])).is_err());
    }
}
