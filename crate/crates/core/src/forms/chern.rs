use num_complex::Complex64;
use super::algebra::GradedAlgebra;
use super::coeff::Coeff;
use super::form::FormValue;
use super::FormError;

/// An `r×r` matrix of `(1,1)`-forms: the curvature of a Hermitian metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMatrix<C> {
    rank: usize,
    dim: usize,
    entries: Vec<FormValue<C>>,
}

impl<C: Coeff> CurvatureMatrix<C> {
    pub fn new(rank: usize, entries: Vec<FormValue<C>>) -> Result<Self, FormError> {
        if rank == 0 || entries.len() != rank * rank {
            return Err(FormError::Shape(format!("{} entries for rank {rank}", entries.len())));
        }
        let dim = entries[0].dim();
        for e in &entries {
            if e.dim() != dim {
                return Err(FormError::DimensionMismatch(dim, e.dim()));
            }
            if let Some(b) = e.bidegree() {
                if b != (1, 1) {
                    return Err(FormError::WrongBidegree { expected: (1, 1), found: b });
                }
            }
            if e.bidegree().is_none() && !e.is_zero() {
                return Err(FormError::WrongBidegree { expected: (1, 1), found: (usize::MAX, usize::MAX) });
            }
        }
        Ok(Self { rank, dim, entries })
    }

    /// Builds `Θ_{ab} = Σ_{ij} R(a, b, i, j) dz_i ∧ dz̄_j`.
    pub fn from_raw(rank: usize, dim: usize, raw: impl Fn(usize, usize, usize, usize) -> C) -> Self {
        let mut entries = Vec::with_capacity(rank * rank);
        for a in 0..rank {
            for b in 0..rank {
                let coeffs: Vec<C> =
                    (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| raw(a, b, i, j)).collect();
                entries.push(FormValue::from_11(dim, &coeffs));
            }
        }
        Self { rank, dim, entries }
    }

    /// `ω ⊗ Id_r`.
    pub fn identity_twist(omega: &FormValue<C>, rank: usize) -> Self {
        let entries = (0..rank * rank)
            .map(|k| if k / rank == k % rank { omega.clone() } else { FormValue::zero(omega.dim()) })
            .collect();
        Self { rank, dim: omega.dim(), entries }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[FormValue<C>] {
        &self.entries
    }

    pub fn get(&self, a: usize, b: usize) -> &FormValue<C> {
        &self.entries[a * self.rank + b]
    }

    /// Coefficient of `dz_i ∧ dz̄_j` in `Θ_{ab}`.
    pub fn raw(&self, a: usize, b: usize, i: usize, j: usize) -> C {
        self.get(a, b).coeff_11(i, j)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self { rank: self.rank, dim: self.dim, entries: self.entries.iter().map(|e| e.scale(c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            rank: self.rank,
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        }
    }

    /// `P Θ Q` for scalar matrices `P`, `Q` given row-major.
    pub fn sandwich(&self, p: &[C], q: &[C]) -> Self {
        let r = self.rank;
        let mut left = Vec::with_capacity(r * r);
        for a in 0..r {
            for b in 0..r {
                let mut acc = FormValue::zero(self.dim);
                for c in 0..r {
                    acc = acc.add(&self.get(c, b).scale(&p[a * r + c]));
                }
                left.push(acc);
            }
        }
        let mut out = Vec::with_capacity(r * r);
        for a in 0..r {
            for b in 0..r {
                let mut acc = FormValue::zero(self.dim);
                for c in 0..r {
                    acc = acc.add(&left[a * r + c].scale(&q[c * r + b]));
                }
                out.push(acc);
            }
        }
        Self { rank: r, dim: self.dim, entries: out }
    }

    /// Largest violation of `R_{ba,ji} = conj R_{ab,ij}` for the matrix `h Θ`,
    /// where `h` is the metric at the point (row-major, or `None` for the identity).
    pub fn hermitian_defect(&self, h: Option<&[Complex64]>) -> f64 {
        let m = metric_curvature(self, h);
        let (r, n) = (self.rank, self.dim);
        let mut worst = 0.0f64;
        for a in 0..r {
            for b in 0..r {
                for i in 0..n {
                    for j in 0..n {
                        let d = m(a, b, i, j) - m(b, a, j, i).conj();
                        worst = worst.max(d.norm());
                    }
                }
            }
        }
        worst
    }
}

/// `(a, b, i, j) ↦ (h Θ)_{ab,ij}` in floating point.
pub(crate) fn metric_curvature<'a, C: Coeff>(
    theta: &'a CurvatureMatrix<C>,
    h: Option<&'a [Complex64]>,
) -> impl Fn(usize, usize, usize, usize) -> Complex64 + 'a {
    let r = theta.rank;
    move |a, b, i, j| match h {
        None => theta.raw(a, b, i, j).to_c64(),
        Some(h) => (0..r).map(|c| h[a * r + c] * theta.raw(c, b, i, j).to_c64()).sum(),
    }
}

/// Total Chern data `c_0 = 1, c_1, …, c_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernData<A> {
    classes: Vec<A>,
}

impl<A: GradedAlgebra> ChernData<A> {
    pub fn new(classes: Vec<A>) -> Self {
        assert!(!classes.is_empty(), "c_0 is required");
        Self { classes }
    }

    pub fn classes(&self) -> &[A] {
        &self.classes
    }

    /// `c_k`, zero beyond the rank.
    pub fn c(&self, k: usize) -> A {
        self.classes.get(k).cloned().unwrap_or_else(|| self.classes[0].zero_like())
    }

    pub fn rank(&self) -> usize {
        self.classes.len() - 1
    }
}

fn matmul<A: GradedAlgebra>(r: usize, x: &[A], y: &[A]) -> Vec<A> {
    let mut out = Vec::with_capacity(r * r);
    for a in 0..r {
        for b in 0..r {
            let mut acc = x[0].zero_like();
            for c in 0..r {
                acc = acc.plus(&x[a * r + c].times(&y[c * r + b]));
            }
            out.push(acc);
        }
    }
    out
}

/// Elementary symmetric functions of a matrix with commuting entries, via
/// Newton's identities on the power traces `p_k = tr(A^k)`.
pub fn elementary_symmetric<A: GradedAlgebra>(rank: usize, entries: &[A]) -> ChernData<A> {
    assert_eq!(entries.len(), rank * rank);
    let one = entries[0].one_like();
    let mut power = entries.to_vec();
    let mut traces = Vec::with_capacity(rank);
    for k in 1..=rank {
        if k > 1 {
            power = matmul(rank, &power, entries);
        }
        let tr = (0..rank).fold(one.zero_like(), |acc, a| acc.plus(&power[a * rank + a]));
        traces.push(tr);
    }
    let mut e = vec![one];
    for k in 1..=rank {
        let mut acc = e[0].zero_like();
        for i in 1..=k {
            let term = e[k - i].times(&traces[i - 1]);
            acc = if i % 2 == 1 { acc.plus(&term) } else { acc.minus(&term) };
        }
        e.push(acc.scale_ratio(1, k as i64));
    }
    ChernData::new(e)
}

/// Chern forms of `(i/2π) Θ`.
pub fn chern_forms<C: Coeff>(theta: &CurvatureMatrix<C>) -> ChernData<FormValue<C>> {
    let scaled = theta.scale(&C::chern_factor());
    elementary_symmetric(theta.rank, &scaled.entries)
}

/// `s_0 = 1`, `s_k = -Σ_{i=1..k} c_i s_{k-i}`.
pub fn segre_forms<A: GradedAlgebra>(c: &ChernData<A>, max_degree: usize) -> Vec<A> {
    let mut s = vec![c.c(0).one_like()];
    for k in 1..=max_degree {
        let mut acc = s[0].zero_like();
        for i in 1..=k.min(c.rank()) {
            acc = acc.plus(&c.c(i).times(&s[k - i]));
        }
        s.push(acc.scale_ratio(-1, 1));
    }
    s
}

fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, bool)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inv = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if prefix[a] > prefix[b] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), inv % 2 == 1));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Schur class `det(h_{λ_i - i + j})` with `h_k = (-1)^k s_k`.
pub fn schur_form<A: GradedAlgebra>(partition: &[usize], c: &ChernData<A>) -> Result<A, FormError> {
    if partition.windows(2).any(|w| w[0] < w[1]) || partition.contains(&0) {
        return Err(FormError::BadPartition(format!("{partition:?} is not a nonincreasing list of positive parts")));
    }
    let len = partition.len();
    if len > c.rank() {
        return Err(FormError::BadPartition(format!("{partition:?} has more than {} parts", c.rank())));
    }
    let size: usize = partition.iter().sum();
    let top = c.c(0).top_degree();
    if size > top {
        return Err(FormError::BadPartition(format!("{partition:?} has weight {size} above the dimension {top}")));
    }
    if len == 0 {
        return Ok(c.c(0).one_like());
    }
    let max_index = partition[0] + len - 1;
    let s = segre_forms(c, max_index);
    let h = |k: isize| -> A {
        if k < 0 {
            c.c(0).zero_like()
        } else if k % 2 == 0 {
            s[k as usize].clone()
        } else {
            s[k as usize].scale_ratio(-1, 1)
        }
    };
    let mut total = c.c(0).zero_like();
    for (perm, odd) in permutations(len) {
        let mut prod = c.c(0).one_like();
        for (i, &j) in perm.iter().enumerate() {
            prod = prod.times(&h(partition[i] as isize - i as isize + j as isize));
            if prod.is_zero_element() {
                break;
            }
        }
        total = if odd { total.minus(&prod) } else { total.plus(&prod) };
    }
    Ok(total)
}

/// `(2r c_2 - (r-1) c_1^2) / 2r` on a surface.
pub fn kobayashi_lubke_rhs<C: Coeff>(c: &ChernData<FormValue<C>>, rank: usize) -> Result<FormValue<C>, FormError> {
    let dim = c.c(0).dim();
    if dim != 2 {
        return Err(FormError::NotASurface(dim));
    }
    if rank == 0 {
        return Err(FormError::Shape("rank must be positive".into()));
    }
    let r = rank as i64;
    let c1 = c.c(1);
    let num = c.c(2).scale(&C::from_ratio(2 * r, 1)).sub(&c1.wedge(&c1).scale(&C::from_ratio(r - 1, 1)));
    Ok(num.scale(&C::from_ratio(1, 2 * r)))
}

/// True when every coefficient of `a - b` has modulus at most `tol`.
pub fn forms_close<C: Coeff>(a: &FormValue<C>, b: &FormValue<C>, tol: f64) -> bool {
    a.sub(b).terms().all(|(_, c)| c.to_c64().norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::algebra::NilpotentScalar;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    type F = FormValue<Complex64>;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian_theta(rng: &mut ChaCha8Rng, r: usize, n: usize) -> CurvatureMatrix<Complex64> {
        let mut raw = vec![c(0.0, 0.0); r * r * n * n];
        let idx = |a: usize, b: usize, i: usize, j: usize| ((a * r + b) * n + i) * n + j;
        for a in 0..r {
            for b in 0..r {
                for i in 0..n {
                    for j in 0..n {
                        if idx(a, b, i, j) <= idx(b, a, j, i) {
                            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                            let z = if idx(a, b, i, j) == idx(b, a, j, i) { c(z.re, 0.0) } else { z };
                            raw[idx(a, b, i, j)] = z;
                            raw[idx(b, a, j, i)] = z.conj();
                        }
                    }
                }
            }
        }
        CurvatureMatrix::from_raw(r, n, |a, b, i, j| raw[idx(a, b, i, j)])
    }

    /// Sum of all principal `k×k` minors, each by the Leibniz formula.
    fn principal_minor_sum(theta: &CurvatureMatrix<Complex64>, k: usize) -> F {
        let r = theta.rank();
        let a = theta.scale(&Complex64::chern_factor());
        let mut total = F::zero(theta.dim());
        for subset in 0u32..(1 << r) {
            if subset.count_ones() as usize != k {
                continue;
            }
            let ix: Vec<usize> = (0..r).filter(|i| subset & (1 << i) != 0).collect();
            for (perm, odd) in permutations(k) {
                let mut prod = F::one(theta.dim());
                for (row, &col) in perm.iter().enumerate() {
                    prod = prod.wedge(a.get(ix[row], ix[col]));
                }
                total = if odd { total.sub(&prod) } else { total.add(&prod) };
            }
        }
        total
    }

    #[test]
    fn diagonal_chern_forms() {
        let (a, b) = (2.0, 3.0);
        let theta = CurvatureMatrix::new(
            2,
            vec![F::term(2, &[0], &[0], c(a, 0.0)), F::zero(2), F::zero(2), F::term(2, &[1], &[1], c(b, 0.0))],
        )
        .unwrap();
        let ch = chern_forms(&theta);
        let k = Complex64::chern_factor();
        let expected1 = F::term(2, &[0], &[0], k * a).add(&F::term(2, &[1], &[1], k * b));
        assert!(forms_close(&ch.c(1), &expected1, 1e-15));
        let expected2 = F::term(2, &[0, 1], &[0, 1], k * k * a * b).neg();
        let written = F::term(2, &[0], &[0], c(1.0, 0.0)).wedge(&F::term(2, &[1], &[1], c(1.0, 0.0)));
        assert!(forms_close(&ch.c(2), &written.scale(&(k * k * a * b)), 1e-15));
        assert!(forms_close(&ch.c(2), &expected2, 1e-15));
    }

    #[test]
    fn zero_curvature() {
        let theta = CurvatureMatrix::<Complex64>::from_raw(3, 2, |_, _, _, _| c(0.0, 0.0));
        let ch = chern_forms(&theta);
        assert_eq!(ch.c(0), F::one(2));
        assert!((1..=3).all(|k| ch.c(k).is_zero()));
    }

    #[test]
    fn newton_matches_minors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let theta = random_hermitian_theta(&mut rng, 3, 3);
            let ch = chern_forms(&theta);
            for k in 1..=3 {
                assert!(forms_close(&ch.c(k), &principal_minor_sum(&theta, k), 1e-12), "k = {k}");
            }
        }
    }

    #[test]
    fn chern_forms_are_real_and_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let theta = random_hermitian_theta(&mut rng, 2, 2);
        assert!(theta.hermitian_defect(None) < 1e-15);
        let ch = chern_forms(&theta);
        for k in 0..=2 {
            assert!(forms_close(&ch.c(k), &ch.c(k).conj_form(), 1e-14));
        }
        let t = 0.7f64;
        let u = [c(t.cos(), 0.0), c(0.0, t.sin()), c(0.0, t.sin()), c(t.cos(), 0.0)];
        let u_inv = [c(t.cos(), 0.0), c(0.0, -t.sin()), c(0.0, -t.sin()), c(t.cos(), 0.0)];
        let rotated = chern_forms(&theta.sandwich(&u, &u_inv));
        for k in 0..=2 {
            assert!(forms_close(&ch.c(k), &rotated.c(k), 1e-12));
        }
    }

    #[test]
    fn segre_inverts_chern() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta = random_hermitian_theta(&mut rng, 3, 3);
        let ch = chern_forms(&theta);
        let s = segre_forms(&ch, 3);
        assert!(forms_close(&s[1], &ch.c(1).neg(), 1e-15));
        let c1 = ch.c(1);
        assert!(forms_close(&s[2], &c1.wedge(&c1).sub(&ch.c(2)), 1e-14));
        for k in 1..=3 {
            let conv = (0..=k).fold(F::zero(3), |acc, i| acc.add(&ch.c(i).wedge(&s[k - i])));
            assert!(conv.max_abs() < 1e-14);
        }
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    /// Chern roots as free generators: c_k is the k-th elementary symmetric polynomial.
    fn formal_roots(m: usize, cap: usize) -> ChernData<NilpotentScalar> {
        let mut entries = vec![NilpotentScalar::zero(m, cap); m * m];
        for i in 0..m {
            entries[i * m + i] = NilpotentScalar::generator(m, cap, i);
        }
        elementary_symmetric(m, &entries)
    }

    #[test]
    fn schur_small_partitions() {
        let ch = formal_roots(3, 3);
        let s = segre_forms(&ch, 3);
        assert_eq!(schur_form(&[1], &ch).unwrap(), ch.c(1));
        let c1 = ch.c(1);
        assert_eq!(schur_form(&[2], &ch).unwrap(), c1.times(&c1).minus(&ch.c(2)));
        assert_eq!(schur_form(&[1, 1], &ch).unwrap(), ch.c(2));
        assert_eq!(schur_form(&[1, 1, 1], &ch).unwrap(), ch.c(3));
        assert_eq!(schur_form(&[3], &ch).unwrap(), s[3].scale_ratio(-1, 1));
        assert!(schur_form(&[1, 1, 1, 1], &ch).is_err());
        assert!(schur_form(&[2, 2], &ch).is_err());
        assert!(schur_form(&[1, 2], &ch).is_err());
    }

    #[test]
    fn schur_two_one_is_the_bialternant() {
        // s_{21}(x1,x2,x3) = Σ_{i≠j} x_i^2 x_j + 2 x1 x2 x3.
        let ch = formal_roots(3, 3);
        let got = schur_form(&[2, 1], &ch).unwrap();
        let mut terms = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let mut e = vec![0u8; 3];
                    e[i] = 2;
                    e[j] = 1;
                    terms.push((e, rat(1)));
                }
            }
        }
        terms.push((vec![1, 1, 1], rat(2)));
        assert_eq!(got, NilpotentScalar::from_terms(3, 3, terms));
    }

    #[test]
    fn schur_two_one_on_diagonal_curvature() {
        // Θ = diag(x_i β) with β = dz1dz̄1 + dz2dz̄2 + dz3dz̄3; every degree-3 polynomial in the
        // roots becomes P(x) (iβ/2π)^3.
        let x = [0.3, -1.1, 2.0];
        let beta = F::from_11(3, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let theta = CurvatureMatrix::new(
            3,
            (0..9).map(|k| if k / 3 == k % 3 { beta.scale(&c(x[k / 3], 0.0)) } else { F::zero(3) }).collect(),
        )
        .unwrap();
        let got = schur_form(&[2, 1], &chern_forms(&theta)).unwrap();
        let mut poly = 2.0 * x[0] * x[1] * x[2];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    poly += x[i] * x[i] * x[j];
                }
            }
        }
        let kb = beta.scale(&Complex64::chern_factor());
        let expected = kb.pow(3).scale(&c(poly, 0.0));
        assert!(forms_close(&got, &expected, 1e-13));
        assert!(expected.top_coefficient().norm() > 1e-3 / (2.0 * PI).powi(3));
    }

    #[test]
    fn kobayashi_lubke_cases() {
        let w = F::from_11(2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]).scale(&c(0.0, -1.0));
        let ch = chern_forms(&CurvatureMatrix::identity_twist(&w, 2));
        assert!(kobayashi_lubke_rhs(&ch, 2).unwrap().max_abs() < 1e-15);
        let line = chern_forms(&CurvatureMatrix::identity_twist(&w, 1));
        assert!(kobayashi_lubke_rhs(&line, 1).unwrap().max_abs() < 1e-15);
        let three = chern_forms(&CurvatureMatrix::<Complex64>::from_raw(1, 3, |_, _, _, _| c(1.0, 0.0)));
        assert!(matches!(kobayashi_lubke_rhs(&three, 1), Err(FormError::NotASurface(3))));
    }
}
