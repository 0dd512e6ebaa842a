use num_complex::Complex64;
use parachern::forms::*;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-4i32..=4, -4i32..=4).prop_map(|(a, b)| Complex64::new(a as f64 / 2.0, b as f64 / 2.0))
}

fn form(dim: usize) -> impl Strategy<Value = FormValue<Complex64>> {
    let full = 1u32 << dim;
    proptest::collection::vec((0..full, 0..full, coeff()), 0..6).prop_map(move |terms| {
        let mut f = FormValue::zero(dim);
        for (i, j, c) in terms {
            f.add_term(Monomial { dz: i, dzb: j }, c);
        }
        f
    })
}

fn homogeneous(f: &FormValue<Complex64>) -> Vec<(usize, FormValue<Complex64>)> {
    (0..=2 * f.dim()).map(|k| (k, f.degree_part(k))).filter(|(_, g)| !g.is_zero()).collect()
}

/// Hermitian curvature with Gaussian-rational entries: `R_{ba,ji} = conj R_{ab,ij}`.
fn exact_theta(rank: usize, dim: usize) -> impl Strategy<Value = CurvatureMatrix<ExactCoeff>> {
    let count = rank * rank * dim * dim;
    proptest::collection::vec((-3i64..=3, -3i64..=3), count).prop_map(move |vals| {
        let idx = |a: usize, b: usize, i: usize, j: usize| ((a * rank + b) * dim + i) * dim + j;
        CurvatureMatrix::from_raw(rank, dim, |a, b, i, j| {
            let (p, q) = (idx(a, b, i, j), idx(b, a, j, i));
            let (re, im) = vals[p.min(q)];
            if p == q {
                ExactCoeff::from_ratio(re, 1)
            } else if p < q {
                ExactCoeff::gaussian_ratio((re, 1), (im, 1))
            } else {
                ExactCoeff::gaussian_ratio((re, 1), (-im, 1))
            }
        })
    })
}

fn float_theta(rank: usize, dim: usize) -> impl Strategy<Value = CurvatureMatrix<Complex64>> {
    exact_theta(rank, dim).prop_map(|t| {
        let entries = t.entries().iter().map(|e| e.to_c64()).collect();
        CurvatureMatrix::new(t.rank(), entries).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn wedge_is_associative(a in form(3), b in form(3), c in form(3)) {
        let lhs = a.wedge(&b).wedge(&c);
        let rhs = a.wedge(&b.wedge(&c));
        prop_assert!(forms_close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn wedge_is_graded_commutative(a in form(3), b in form(3)) {
        for (p, x) in homogeneous(&a) {
            for (q, y) in homogeneous(&b) {
                let xy = x.wedge(&y);
                let yx = y.wedge(&x);
                let expected = if (p * q) % 2 == 1 { yx.neg() } else { yx };
                prop_assert!(forms_close(&xy, &expected, 1e-12));
            }
        }
    }

    #[test]
    fn conjugation_is_an_involution(a in form(3)) {
        prop_assert_eq!(a.conj_form().conj_form(), a);
    }

    #[test]
    fn chern_times_segre_is_one_exactly(theta in (1usize..=3, 1usize..=3).prop_flat_map(|(r, n)| exact_theta(r, n))) {
        let ch = chern_forms(&theta);
        let n = theta.dim();
        let s = segre_forms(&ch, n);
        for k in 1..=n {
            let conv = (0..=k).fold(FormValue::zero(n), |acc, i| acc.add(&ch.c(i).wedge(&s[k - i])));
            prop_assert!(conv.is_zero(), "degree {}", k);
        }
    }

    #[test]
    fn chern_forms_are_real(theta in (1usize..=3, 1usize..=3).prop_flat_map(|(r, n)| exact_theta(r, n))) {
        let ch = chern_forms(&theta);
        for k in 0..=theta.rank() {
            prop_assert_eq!(ch.c(k).conj_form(), ch.c(k).clone());
            if !ch.c(k).is_zero() {
                prop_assert_eq!(ch.c(k).bidegree(), Some((k, k)));
            }
        }
    }

    #[test]
    fn chern_forms_are_unitarily_invariant(theta in float_theta(3, 2), angles in proptest::collection::vec(-3.0f64..3.0, 3)) {
        // U = exp(iA) for a Hermitian A, built from eigen-decomposition.
        let a = nalgebra::DMatrix::from_fn(3, 3, |i, j| {
            let x = angles[(i + j) % 3];
            if i == j { Complex64::new(x, 0.0) } else if i < j { Complex64::new(0.3 * x, 0.2) } else { Complex64::new(0.3 * angles[(i + j) % 3], -0.2) }
        });
        let eig = a.symmetric_eigen();
        let d = nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(0.0, l).exp()));
        let u = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        let u_inv = u.adjoint();
        let row = |m: &nalgebra::DMatrix<Complex64>| (0..9).map(|k| m[(k / 3, k % 3)]).collect::<Vec<_>>();
        let rotated = theta.sandwich(&row(&u), &row(&u_inv));
        let (c0, c1) = (chern_forms(&theta), chern_forms(&rotated));
        for k in 0..=3 {
            prop_assert!(forms_close(&c0.c(k), &c1.c(k), 1e-12));
        }
    }

    #[test]
    fn schur_extremes_match_chern_and_segre(theta in float_theta(3, 3)) {
        let ch = chern_forms(&theta);
        let s = segre_forms(&ch, 3);
        for k in 1..=3 {
            let column = vec![1; k];
            prop_assert!(forms_close(&schur_form(&column, &ch).unwrap(), &ch.c(k), 1e-12));
            let sign = if k % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) };
            prop_assert!(forms_close(&schur_form(&[k], &ch).unwrap(), &s[k].scale(&sign), 1e-12));
        }
    }

    #[test]
    fn nakano_positive_implies_griffiths_positive(theta in float_theta(2, 2), shift in 0.0f64..20.0) {
        let omega = FormValue::from_11(2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let shifted = theta.add(&CurvatureMatrix::identity_twist(&omega, 2).scale(&Complex64::new(shift, 0.0)));
        let cfg = SamplingConfig { samples: 64, ..SamplingConfig::default() };
        let nk = nakano_test(&shifted, None, 1e-10).unwrap();
        let g = griffiths_test(&shifted, None, &cfg).unwrap();
        if nk.verdict == Verdict::Positive {
            prop_assert_eq!(g.verdict, Verdict::Positive);
        }
        prop_assert!(g.margin >= nk.margin - 1e-10);
    }
}
