use std::sync::OnceLock;

use num_traits::{One, Zero};
use proptest::prelude::*;

use splinegram::decay::{phi, phi_reciprocal, psi, theta_factor};
use splinegram::gram::quadratic_entry;
use splinegram::polycert::certify::{
    embed_window, eval_on_knots, inequality_function, numeric_sides,
};
use splinegram::polycert::{
    build_symbolic, certify_inequality, Inequality, MultiPoly, RationalFn, SymbolicExpr,
    TermBudget, Window, DEFAULT_TERM_BUDGET,
};
use splinegram::{Rational, Scalar};

const NV: usize = 3;

fn poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(
        (prop::collection::vec(0u32..3, NV), -5i64..=5, 1i64..=4),
        0..6,
    )
    .prop_map(|terms| {
        MultiPoly::from_terms(
            NV,
            terms
                .into_iter()
                .map(|(e, n, d)| (e, Rational::from_ratio(n, d))),
        )
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-9i64..=9, 1i64..=7), n).prop_map(|v| {
        v.into_iter()
            .map(|(a, b)| Rational::from_ratio(a, b))
            .collect()
    })
}

fn positive_point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((1i64..=60, 1i64..=9), n).prop_map(|v| {
        v.into_iter()
            .map(|(a, b)| Rational::from_ratio(a, b))
            .collect()
    })
}

/// Nonzero polynomial with positive values on the positive orthant.
fn positive_poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0u32..3, NV), 1i64..=5), 1..5).prop_map(|terms| {
        MultiPoly::from_terms(
            NV,
            terms.into_iter().map(|(e, n)| (e, Rational::from_int(n))),
        )
    })
}

fn cheap_functions() -> &'static Vec<(Inequality, RationalFn)> {
    static CELL: OnceLock<Vec<(Inequality, RationalFn)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let budget = TermBudget::new(DEFAULT_TERM_BUDGET);
        [
            Inequality::Offdiag,
            Inequality::PsiA,
            Inequality::ThetaMinor,
            Inequality::PsiFromPhi,
            Inequality::ThetaProduct,
        ]
        .into_iter()
        .map(|w| (w, inequality_function(w, &budget).unwrap()))
        .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(p.add(&q), q.add(&p));
        prop_assert_eq!(p.mul(&q), q.mul(&p));
        prop_assert_eq!(p.add(&q).add(&r), p.add(&q.add(&r)));
        prop_assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
        prop_assert_eq!(p.mul(&q.add(&r)), p.mul(&q).add(&p.mul(&r)));
        prop_assert!(p.sub(&p).is_zero());
        prop_assert_eq!(p.mul(&MultiPoly::one(NV)), p.clone());
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in poly(), q in poly(), x in point(NV), e in 0u32..4) {
        prop_assert_eq!(p.add(&q).eval(&x), p.eval(&x) + q.eval(&x));
        prop_assert_eq!(p.mul(&q).eval(&x), p.eval(&x) * q.eval(&x));
        prop_assert_eq!(p.pow(e).eval(&x), Scalar::powi(&p.eval(&x), e));
    }

    #[test]
    fn exact_division_inverts_multiplication(p in poly(), q in positive_poly()) {
        prop_assert_eq!(p.mul(&q).div_exact(&q), Some(p));
    }

    #[test]
    fn rational_functions_evaluate_consistently(
        p in poly(), q in positive_poly(), r in poly(), s in positive_poly(), x in positive_point(NV),
    ) {
        let budget = TermBudget::unlimited();
        let f = RationalFn::from_parts(&p, &q).unwrap();
        let g = RationalFn::from_parts(&r, &s).unwrap();
        let (fx, gx) = (f.eval(&x).unwrap(), g.eval(&x).unwrap());
        prop_assert_eq!(f.add(&g, &budget).unwrap().eval(&x).unwrap(), fx.clone() + gx.clone());
        prop_assert_eq!(f.sub(&g, &budget).unwrap().eval(&x).unwrap(), fx.clone() - gx.clone());
        prop_assert_eq!(f.mul(&g).eval(&x).unwrap(), fx.clone() * gx.clone());
        let (num, den) = f.add(&g, &budget).unwrap().expand_parts(&budget).unwrap();
        prop_assert_eq!(num.eval(&x) / den.eval(&x), fx.clone() + gx);
        let mut reduced = f.clone();
        reduced.cancel_by_division(&budget).unwrap();
        prop_assert_eq!(reduced.eval(&x).unwrap(), fx);
    }

    #[test]
    fn symbolic_entries_match_numeric_modules(gaps in positive_point(6)) {
        // The phi_step window: six gaps, first at offset -2.
        let window = Window::new(6, -2);
        let (ks, n) = embed_window(&window, &gaps).unwrap();
        prop_assert_eq!(&ks.breakpoint_gaps()[4..10].iter().map(|g| g / ks.breakpoint_gaps()[0].clone()).collect::<Vec<_>>(), &gaps);
        // Window variables are gaps of the normalized sequence.
        let vars: Vec<Rational> = ks.breakpoint_gaps()[4..10].to_vec();
        for (i, j) in [(-1, -1), (-1, 0), (-1, 1), (0, 0), (0, 1), (1, 1)] {
            let sym = build_symbolic(SymbolicExpr::GramEntry(i, j), window.clone()).unwrap();
            let num = quadratic_entry(&ks, (n as i64 + i) as usize, (n as i64 + j) as usize);
            prop_assert_eq!(sym.eval(&vars).unwrap(), num);
        }
        for d in -1..=1i64 {
            let at = (n as i64 + d) as usize;
            let sym = build_symbolic(SymbolicExpr::PhiRecip(d), window.clone()).unwrap();
            prop_assert_eq!(sym.eval(&vars).unwrap(), phi_reciprocal(&ks, at).unwrap());
            let sym = build_symbolic(SymbolicExpr::Phi(d), window.clone()).unwrap();
            prop_assert_eq!(sym.eval(&vars).unwrap(), phi(&ks, at).unwrap());
        }
        let sym = build_symbolic(SymbolicExpr::Psi(0), window.clone()).unwrap();
        prop_assert_eq!(sym.eval(&vars).unwrap(), psi(&ks, n).unwrap());
        let sym = build_symbolic(SymbolicExpr::ThetaHat(0), window.clone()).unwrap();
        prop_assert_eq!(sym.eval(&vars).unwrap(), phi(&ks, n).unwrap() * theta_factor(&ks, n).unwrap());
    }

    #[test]
    fn inequality_functions_are_rhs_minus_lhs(gaps in positive_point(6)) {
        for (which, p) in cheap_functions() {
            let window = which.window();
            let (ks, n) = embed_window(&window, &gaps[..window.nvars]).unwrap();
            let (lhs, rhs) = numeric_sides(*which, &ks, n).unwrap();
            prop_assert_eq!(eval_on_knots(*which, p, &ks).unwrap(), rhs - lhs);
        }
    }

    #[test]
    fn certified_functions_are_nonnegative(gaps in positive_point(6)) {
        for (which, p) in cheap_functions() {
            let value = p.eval(&gaps[..which.window().nvars]).unwrap();
            prop_assert!(value >= Rational::zero(), "{} negative at {:?}", which, gaps);
        }
    }
}

#[test]
fn certificates_succeed_and_sound() {
    for (which, p) in cheap_functions() {
        let cert = certify_inequality(*which, DEFAULT_TERM_BUDGET).unwrap();
        assert!(cert.success, "{which}");
        assert!(cert.witness.is_none());
        assert!(cert.num_coeffs_nonneg && cert.den_coeffs_nonneg);
        // The expanded quotient agrees with the factored form.
        let at: Vec<Rational> = (1..=which.window().nvars as i64)
            .map(|i| Rational::from_ratio(i, 3))
            .collect();
        let (num, den) = p.expand_parts(&TermBudget::unlimited()).unwrap();
        assert_eq!(p.eval(&at).unwrap(), num.eval(&at) / den.eval(&at));
        assert!(p.eval(&at).unwrap() >= Rational::zero());
    }
}

#[test]
fn negative_function_is_rejected_with_witness() {
    // x1 - x2 is not nonnegative on the orthant.
    let p = MultiPoly::var(2, 0).sub(&MultiPoly::var(2, 1));
    let f = RationalFn::from_poly(&p);
    let cert = splinegram::polycert::certify_nonneg("diff", &f, &TermBudget::unlimited()).unwrap();
    assert!(!cert.success);
    let w = cert.witness.unwrap();
    assert_eq!(w.monomial, vec![0, 1]);
    assert_eq!(w.coeff, -Rational::one());
}

#[test]
fn offdiag_denominator_is_the_reference_product() {
    let cert = certify_inequality(Inequality::Offdiag, DEFAULT_TERM_BUDGET).unwrap();
    let cmp = cert.reference_denominator.unwrap();
    assert!(cmp.proportional && cmp.divides && cmp.extra_factors.is_empty());
}

#[test]
fn phi_step_denominator_structure() {
    // The linear part of the cleared denominator divides the reference
    // product; the single remaining factor is the numerator of
    // 1/phi_{n-1}, which stays because the inductive step is multiplied by it.
    let budget = TermBudget::new(DEFAULT_TERM_BUDGET);
    let mut f = inequality_function(Inequality::PhiStep, &budget).unwrap();
    f.cancel_by_division(&budget).unwrap();
    let reference: Vec<(Vec<u32>, u32)> = vec![
        (vec![1, 1, 0, 0, 0, 0], 4),
        (vec![0, 1, 1, 0, 0, 0], 5),
        (vec![0, 0, 1, 1, 0, 0], 8),
        (vec![0, 0, 0, 1, 1, 0], 5),
        (vec![0, 0, 0, 0, 1, 1], 2),
    ];
    let linear = |mask: &[u32]| {
        MultiPoly::from_terms(
            6,
            mask.iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(i, _)| {
                    let mut e = vec![0; 6];
                    e[i] = 1;
                    (e, Rational::one())
                }),
        )
    };
    let phi_m1 = build_symbolic(SymbolicExpr::PhiRecip(-1), Window::new(6, -2)).unwrap();
    let (phi_num, _) = phi_m1.expand_parts(&TermBudget::unlimited()).unwrap();
    let phi_num = phi_num.primitive().1;
    let mut extras = Vec::new();
    for (factor, power) in f.denominator_factors() {
        if factor.total_degree() == 1 {
            let (_, e) = reference
                .iter()
                .find(|(mask, _)| linear(mask) == factor)
                .unwrap_or_else(|| panic!("unexpected linear factor {factor}"));
            assert!(
                power <= *e,
                "({factor})^{power} exceeds the reference power {e}"
            );
        } else {
            extras.push((factor, power));
        }
    }
    assert_eq!(extras.len(), 1);
    let (extra, power) = &extras[0];
    assert_eq!(*power, 1);
    assert_eq!(extra, &phi_num);
    assert!(extra.coefficients_nonneg());
    let (num, _) = f.expand_parts(&budget).unwrap();
    assert!(num.div_exact(extra).is_none());
}
