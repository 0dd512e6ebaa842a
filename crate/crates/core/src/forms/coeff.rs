use std::f64::consts::PI;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use super::FormError;

/// Coefficient ring of a [`FormValue`](super::FormValue).
///
/// Two implementations exist: `Complex64` for sampling and numerics, and
/// [`ExactCoeff`] for exact identities, where `1/2π` is kept as a formal symbol.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn conj(&self) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn imag_unit() -> Self;
    /// The Chern normalization `i/2π`.
    fn chern_factor() -> Self;
    fn to_c64(&self) -> Complex64;
    fn json_fields(&self) -> Vec<Map<String, Value>>;
    fn from_json_fields(fields: &Map<String, Value>) -> Result<Self, FormError>;
}

impl Coeff for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::i()
    }

    fn chern_factor() -> Self {
        Complex64::new(0.0, 1.0 / (2.0 * PI))
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn json_fields(&self) -> Vec<Map<String, Value>> {
        let mut m = Map::new();
        m.insert("re".into(), json!(self.re));
        m.insert("im".into(), json!(self.im));
        vec![m]
    }

    fn from_json_fields(fields: &Map<String, Value>) -> Result<Self, FormError> {
        let get = |k: &str| -> Result<f64, FormError> {
            match fields.get(k) {
                None => Ok(0.0),
                Some(v) => v.as_f64().ok_or_else(|| FormError::Json(format!("field {k:?} is not a number"))),
            }
        };
        if fields.contains_key("tau") {
            return Err(FormError::Json("\"tau\" is only meaningful for exact coefficients".into()));
        }
        Ok(Complex64::new(get("re")?, get("im")?))
    }
}

/// A polynomial in the formal symbol `τ = 1/2π` with Gaussian-rational
/// coefficients. Entry `k` of `terms` multiplies `τ^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactCoeff {
    terms: Vec<Complex<BigRational>>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_rat(v: &Value) -> Result<BigRational, FormError> {
    let s = v.as_str().ok_or_else(|| FormError::Json("exact coefficient must be a \"num/den\" string".into()))?;
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| FormError::Json(format!("bad numerator in {s:?}")))?;
    let d: BigInt = d.trim().parse().map_err(|_| FormError::Json(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(FormError::Json(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

impl ExactCoeff {
    pub fn from_terms(mut terms: Vec<Complex<BigRational>>) -> Self {
        while terms.last().is_some_and(|c| c.is_zero()) {
            terms.pop();
        }
        Self { terms }
    }

    pub fn gaussian(re: BigRational, im: BigRational) -> Self {
        Self::from_terms(vec![Complex::new(re, im)])
    }

    pub fn gaussian_ratio(re: (i64, i64), im: (i64, i64)) -> Self {
        Self::gaussian(rat(re.0, re.1), rat(im.0, im.1))
    }

    /// The symbol `τ = 1/2π`.
    pub fn tau() -> Self {
        Self::from_terms(vec![Complex::zero(), Complex::one()])
    }

    pub fn terms(&self) -> &[Complex<BigRational>] {
        &self.terms
    }

    pub fn tau_degree(&self) -> Option<usize> {
        self.terms.len().checked_sub(1)
    }
}

impl Zero for ExactCoeff {
    fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for ExactCoeff {
    fn one() -> Self {
        Self { terms: vec![Complex::one()] }
    }
}

impl Add for ExactCoeff {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        let n = self.terms.len().max(o.terms.len());
        let terms = (0..n)
            .map(|k| {
                let a = self.terms.get(k).cloned().unwrap_or_else(Complex::zero);
                let b = o.terms.get(k).cloned().unwrap_or_else(Complex::zero);
                a + b
            })
            .collect();
        Self::from_terms(terms)
    }
}

impl Neg for ExactCoeff {
    type Output = Self;

    fn neg(self) -> Self {
        Self { terms: self.terms.into_iter().map(|c| -c).collect() }
    }
}

impl Sub for ExactCoeff {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for ExactCoeff {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut terms = vec![Complex::<BigRational>::zero(); self.terms.len() + o.terms.len() - 1];
        for (i, a) in self.terms.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.terms.iter().enumerate() {
                terms[i + j] = &terms[i + j] + a * b;
            }
        }
        Self::from_terms(terms)
    }
}

impl Coeff for ExactCoeff {
    fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|c| c.conj()).collect() }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::gaussian(rat(num, den), BigRational::zero())
    }

    fn imag_unit() -> Self {
        Self::gaussian(BigRational::zero(), BigRational::one())
    }

    fn chern_factor() -> Self {
        Self::imag_unit() * Self::tau()
    }

    fn to_c64(&self) -> Complex64 {
        let tau = 1.0 / (2.0 * PI);
        let mut acc = Complex64::zero();
        for c in self.terms.iter().rev() {
            let re = c.re.to_f64().unwrap_or(f64::NAN);
            let im = c.im.to_f64().unwrap_or(f64::NAN);
            acc = acc * tau + Complex64::new(re, im);
        }
        acc
    }

    fn json_fields(&self) -> Vec<Map<String, Value>> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let mut m = Map::new();
                m.insert("re".into(), json!(rat_to_string(&c.re)));
                m.insert("im".into(), json!(rat_to_string(&c.im)));
                if k > 0 {
                    m.insert("tau".into(), json!(k));
                }
                m
            })
            .collect()
    }

    fn from_json_fields(fields: &Map<String, Value>) -> Result<Self, FormError> {
        let re = fields.get("re").map(parse_rat).transpose()?.unwrap_or_else(BigRational::zero);
        let im = fields.get("im").map(parse_rat).transpose()?.unwrap_or_else(BigRational::zero);
        let k = match fields.get("tau") {
            None => 0,
            Some(v) => v.as_u64().ok_or_else(|| FormError::Json("\"tau\" must be a non-negative integer".into()))? as usize,
        };
        let mut terms = vec![Complex::zero(); k + 1];
        terms[k] = Complex::new(re, im);
        Ok(Self::from_terms(terms))
    }
}

/// Largest absolute value among the real and imaginary parts of the τ-coefficients.
pub fn exact_height(c: &ExactCoeff) -> BigRational {
    c.terms()
        .iter()
        .flat_map(|z| [z.re.abs(), z.im.abs()])
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_arithmetic() {
        let k = ExactCoeff::chern_factor();
        let k2 = k.clone() * k.clone();
        // (i τ)^2 = -τ^2
        assert_eq!(k2.tau_degree(), Some(2));
        assert_eq!(k2.terms()[2], Complex::new(rat(-1, 1), rat(0, 1)));
        let v = k2.to_c64();
        assert!((v.re + 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert_eq!(k.clone() - k, ExactCoeff::zero());
    }

    #[test]
    fn json_round_trip_exact() {
        let c = ExactCoeff::from_terms(vec![
            Complex::new(rat(1, 3), rat(0, 1)),
            Complex::zero(),
            Complex::new(rat(0, 1), rat(-5, 7)),
        ]);
        let back = c
            .json_fields()
            .iter()
            .map(|m| ExactCoeff::from_json_fields(m).unwrap())
            .fold(ExactCoeff::zero(), |a, b| a + b);
        assert_eq!(back, c);
    }
}
