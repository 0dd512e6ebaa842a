use std::collections::BTreeMap;

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::Num;

use super::PushforwardError;
use crate::forms::{Coeff, CurvatureMatrix, ExactCoeff, FormValue, GradedAlgebra};

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// `(r-1)! ∏ a_i! / (r-1+Σa_i)!`: the average of `∏|u_i|^{2a_i} / |u|^{2Σa}` against
/// the Fubini–Study volume of `P^{r-1}` normalized to one.
pub fn fubini_study_moment(exponents: &[u8]) -> (i64, i64) {
    let r = exponents.len();
    let m: usize = exponents.iter().map(|&a| a as usize).sum();
    let num = factorial(r - 1) * exponents.iter().map(|&a| factorial(a as usize)).product::<i64>();
    (num, factorial(r - 1 + m))
}

/// Signed fiber integral of `1/(1 + c_1(O(1)))` over `P^{r-1}` at a point where
/// the twisted curvature is `x` (row-major, already multiplied by `i/2π`).
/// Degree `m` comes from `(-1)^m C(r+m-1, m)` times the fiber average of
/// `(Σ x_{ij} u_i ū_j / |u|²)^m`. The overall sign `(-1)^{r-1}` of the fiber
/// integral is removed so that the result is comparable with `1/c`.
pub fn signed_fiber_integral<A: GradedAlgebra>(rank: usize, x: &[A]) -> Vec<A> {
    assert_eq!(x.len(), rank * rank);
    let one = x[0].one_like();
    let top = one.top_degree();
    let mut out = vec![one.clone()];
    let mut states: BTreeMap<(Vec<u8>, Vec<u8>), A> = BTreeMap::new();
    states.insert((vec![0; rank], vec![0; rank]), one.clone());
    for m in 1..=top {
        let mut next: BTreeMap<(Vec<u8>, Vec<u8>), A> = BTreeMap::new();
        for ((a, b), v) in &states {
            for i in 0..rank {
                for j in 0..rank {
                    let entry = &x[i * rank + j];
                    if entry.is_zero_element() {
                        continue;
                    }
                    let prod = v.times(entry);
                    if prod.is_zero_element() {
                        continue;
                    }
                    let (mut a2, mut b2) = (a.clone(), b.clone());
                    a2[i] += 1;
                    b2[j] += 1;
                    let slot = next.entry((a2, b2)).or_insert_with(|| one.zero_like());
                    *slot = slot.plus(&prod);
                }
            }
        }
        states = next;
        let mut total = one.zero_like();
        for ((a, b), v) in &states {
            if a == b {
                let (num, den) = fubini_study_moment(a);
                total = total.plus(&v.scale_ratio(num, den));
            }
        }
        let binom = factorial(rank + m - 1) / (factorial(m) * factorial(rank - 1));
        let sign = if m % 2 == 0 { 1 } else { -1 };
        out.push(total.scale_ratio(sign * binom, 1));
    }
    out
}

/// The push-forward `s_0, …, s_n` of the Segre form of `O(1)` for curvature `Θ`.
pub fn symbolic_pushforward<C: Coeff>(theta: &CurvatureMatrix<C>) -> Result<Vec<FormValue<C>>, PushforwardError> {
    let (n, r) = (theta.dim(), theta.rank());
    if n > 3 || r > 4 {
        return Err(PushforwardError::Unsupported { dim: n, rank: r });
    }
    let x = theta.scale(&C::chern_factor());
    Ok(signed_fiber_integral(r, x.entries()))
}

/// Largest coefficient change of the push-forward under `Θ ↦ U Θ U^*`.
pub fn unitary_invariance_probe<C: Coeff>(theta: &CurvatureMatrix<C>, u: &[C]) -> Result<f64, PushforwardError> {
    let r = theta.rank();
    if u.len() != r * r {
        return Err(PushforwardError::Forms(crate::forms::FormError::Shape(format!("{} entries for rank {r}", u.len()))));
    }
    let adjoint: Vec<C> = (0..r * r).map(|k| u[(k % r) * r + k / r].conj()).collect();
    let base = symbolic_pushforward(theta)?;
    let moved = symbolic_pushforward(&theta.sandwich(u, &adjoint))?;
    Ok(base
        .iter()
        .zip(&moved)
        .map(|(a, b)| a.sub(b).terms().map(|(_, c)| c.to_c64().norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max))
}

fn invert<T: Clone + Num>(m: &[Complex<T>], r: usize) -> Option<Vec<Complex<T>>> {
    let mut a = m.to_vec();
    let mut inv: Vec<Complex<T>> =
        (0..r * r).map(|k| if k / r == k % r { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) }).collect();
    for col in 0..r {
        let pivot = (col..r).find(|&row| !num_traits::Zero::is_zero(&a[row * r + col]))?;
        for k in 0..r {
            a.swap(col * r + k, pivot * r + k);
            inv.swap(col * r + k, pivot * r + k);
        }
        let p = a[col * r + col].clone();
        for k in 0..r {
            a[col * r + k] = a[col * r + k].clone() / p.clone();
            inv[col * r + k] = inv[col * r + k].clone() / p.clone();
        }
        for row in 0..r {
            if row == col {
                continue;
            }
            let f = a[row * r + col].clone();
            for k in 0..r {
                a[row * r + k] = a[row * r + k].clone() - f.clone() * a[col * r + k].clone();
                inv[row * r + k] = inv[row * r + k].clone() - f.clone() * inv[col * r + k].clone();
            }
        }
    }
    Some(inv)
}

fn cayley<T: Clone + Num + std::ops::Neg<Output = T>>(m: &[Complex<T>], r: usize) -> Option<Vec<Complex<T>>> {
    let two = T::one() + T::one();
    // A = (M - M^*)/2 is skew-Hermitian, so I + A is invertible and the result unitary.
    let skew: Vec<Complex<T>> = (0..r * r).map(|k| (m[k].clone() - m[(k % r) * r + k / r].conj()) / two.clone()).collect();
    let id = |k: usize| if k / r == k % r { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) };
    let minus: Vec<Complex<T>> = (0..r * r).map(|k| id(k) - skew[k].clone()).collect();
    let plus: Vec<Complex<T>> = (0..r * r).map(|k| id(k) + skew[k].clone()).collect();
    let inv = invert(&plus, r)?;
    Some(
        (0..r * r)
            .map(|k| {
                let (i, j) = (k / r, k % r);
                (0..r).fold(Complex::new(T::zero(), T::zero()), |acc, c| acc + minus[i * r + c].clone() * inv[c * r + j].clone())
            })
            .collect(),
    )
}

/// An exactly unitary matrix with Gaussian-rational entries, from the Cayley
/// transform of the skew-Hermitian part of `m`.
pub fn cayley_unitary_exact(m: &[Complex<BigRational>], rank: usize) -> Result<Vec<ExactCoeff>, PushforwardError> {
    let u = cayley(m, rank).ok_or(PushforwardError::Singular)?;
    Ok(u.into_iter().map(|c| ExactCoeff::gaussian(c.re, c.im)).collect())
}

pub fn cayley_unitary(m: &[Complex64], rank: usize) -> Result<Vec<Complex64>, PushforwardError> {
    cayley(m, rank).ok_or(PushforwardError::Singular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{chern_forms, segre_forms, NilpotentScalar};
    use num_bigint::BigInt;
    use num_traits::{One, ToPrimitive, Zero};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn gauss(a: i64, b: i64) -> ExactCoeff {
        ExactCoeff::gaussian_ratio((a, 1), (b, 1))
    }

    /// A Hermitian-symmetric `Θ = -i P` with `P_{(a,i),(b,j)}` Hermitian, small integer entries.
    fn exact_theta(rank: usize, dim: usize, seed: i64) -> CurvatureMatrix<ExactCoeff> {
        let entry = |a: usize, b: usize, i: usize, j: usize| -> (i64, i64) {
            let (p, q2) = (a * dim + i, b * dim + j);
            let h = |x: usize, y: usize| ((x * 7 + y * 3) as i64 * seed + 1) % 5 - 2;
            if p == q2 {
                (h(p, p), 0)
            } else if p < q2 {
                (h(p, q2), h(q2, p))
            } else {
                (h(q2, p), -h(p, q2))
            }
        };
        CurvatureMatrix::from_raw(rank, dim, |a, b, i, j| {
            let (re, im) = entry(a, b, i, j);
            gauss(0, -1) * gauss(re, im)
        })
    }

    #[test]
    fn moments() {
        assert_eq!(fubini_study_moment(&[0, 0]), (1, 1));
        assert_eq!(fubini_study_moment(&[1, 0]), (1, 2));
        assert_eq!(fubini_study_moment(&[1, 1, 0]), (2, 24));
        assert_eq!(fubini_study_moment(&[2]), (2, 2));
    }

    #[test]
    fn rank_one_is_the_identity() {
        let x = [NilpotentScalar::generator(1, 3, 0)];
        let s = signed_fiber_integral(1, &x);
        let c = crate::forms::elementary_symmetric(1, &x);
        assert_eq!(s, segre_forms(&c, 3));
    }

    #[test]
    fn matches_segre_of_chern() {
        for (rank, dim, seed) in [(2, 1, 1), (2, 2, 2), (3, 2, 3), (3, 3, 5), (4, 2, 7)] {
            let theta = exact_theta(rank, dim, seed);
            let s = symbolic_pushforward(&theta).unwrap();
            assert_eq!(s, segre_forms(&chern_forms(&theta), dim), "rank {rank} dim {dim}");
        }
    }

    #[test]
    fn generic_nilpotent_entries() {
        // Each entry its own generator: the identity holds as polynomials.
        let (rank, cap) = (2, 2);
        let x: Vec<NilpotentScalar> = (0..rank * rank).map(|k| NilpotentScalar::generator(rank * rank, cap, k)).collect();
        let s = signed_fiber_integral(rank, &x);
        let c = crate::forms::elementary_symmetric(rank, &x);
        assert_eq!(s, segre_forms(&c, cap));
    }

    #[test]
    fn unitary_probe() {
        let theta = exact_theta(3, 2, 4);
        let id: Vec<ExactCoeff> = (0..9).map(|k| if k % 4 == 0 { ExactCoeff::one() } else { ExactCoeff::zero() }).collect();
        assert_eq!(unitary_invariance_probe(&theta, &id).unwrap(), 0.0);
        let m: Vec<Complex<BigRational>> = (0..9).map(|k| Complex::new(q(k as i64 % 3 - 1, 2), q((k as i64 * 5) % 7 - 3, 3))).collect();
        let u = cayley_unitary_exact(&m, 3).unwrap();
        // U U^* = I exactly.
        for i in 0..3 {
            for j in 0..3 {
                let v = (0..3).fold(ExactCoeff::zero(), |acc, k| acc + u[i * 3 + k].clone() * u[j * 3 + k].conj());
                assert_eq!(v, if i == j { ExactCoeff::one() } else { ExactCoeff::zero() });
            }
        }
        assert_eq!(unitary_invariance_probe(&theta, &u).unwrap(), 0.0);
        let mf: Vec<Complex64> = m.iter().map(|c| Complex64::new(c.re.to_f64().unwrap(), c.im.to_f64().unwrap())).collect();
        let uf = cayley_unitary(&mf, 3).unwrap();
        let tf = CurvatureMatrix::from_raw(3, 2, |a, b, i, j| theta.raw(a, b, i, j).to_c64());
        assert!(unitary_invariance_probe(&tf, &uf).unwrap() < 1e-10);
    }

    #[test]
    fn size_limits() {
        let theta = CurvatureMatrix::from_raw(5, 1, |_, _, _, _| Complex64::new(0.0, 0.0));
        assert!(matches!(symbolic_pushforward(&theta), Err(PushforwardError::Unsupported { .. })));
    }
}
