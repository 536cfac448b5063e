//! Property tests for the structural invariants: theta-function symmetries,
//! elliptic-number antisymmetry, covering-coefficient palindromes over random
//! parameter pairs, polynomial-algebra consistency, and multiset matching.

use proptest::prelude::*;

use lamecurve::curve::{curve_coeffs, multiset_match};
use lamecurve::polyalg::PolynomialC;
use lamecurve::theta::c64;
use lamecurve::{C, EllipticContext};

fn base_ctx() -> EllipticContext {
    EllipticContext::default_params(2).expect("default parameters are valid")
}

fn arb_x() -> impl Strategy<Value = C> {
    (-0.5f64..0.5, -0.3f64..0.3).prop_map(|(re, im)| c64(re, im))
}

fn arb_coeffs(max_len: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec(
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| c64(re, im)),
        1..=max_len,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta1_is_odd_and_the_others_even(x in arb_x()) {
        let c = base_ctx();
        let scale = 1.0 + c.theta1(x).norm();
        prop_assert!((c.theta1(-x) + c.theta1(x)).norm() < 1e-12 * scale);
        for a in 2..=4u8 {
            let v = c.theta(a, x).unwrap();
            let w = c.theta(a, -x).unwrap();
            prop_assert!((v - w).norm() < 1e-12 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn theta1_satisfies_both_quasi_periods(x in arb_x()) {
        let c = base_ctx();
        let v = c.theta1(x);
        prop_assume!(v.norm() > 1e-3);
        let shift1 = c.theta1(x + 1.0);
        prop_assert!((shift1 + v).norm() < 1e-11 * v.norm());
        let pi = std::f64::consts::PI;
        let factor = -(c64(0.0, -pi) * c.tau + c64(0.0, -2.0 * pi) * x).exp();
        let shift_tau = c.theta1(x + c.tau);
        prop_assert!((shift_tau - factor * v).norm() < 1e-10 * shift_tau.norm());
    }

    #[test]
    fn elliptic_numbers_are_odd_in_the_index(n in 1i64..12) {
        let c = base_ctx();
        prop_assert_eq!(c.en(0), c64(0.0, 0.0));
        let scale = c.en(n).norm();
        prop_assert!((c.en(-n) + c.en(n)).norm() < 1e-13 * scale);
    }

    #[test]
    fn covering_coefficients_are_palindromic_for_random_parameters(
        ell in 1u32..=3,
        eta_re in 0.04f64..0.2,
        eta_im in 0.02f64..0.12,
        tau_re in -0.3f64..0.3,
        tau_im in 0.9f64..1.4,
    ) {
        let ctx = EllipticContext::new(ell, c64(eta_re, eta_im), c64(tau_re, tau_im));
        // Nearly resonant draws are legitimately rejected by validation.
        prop_assume!(ctx.is_ok());
        let ctx = ctx.unwrap();
        let c = curve_coeffs(&ctx).unwrap();
        let n = c.len() - 1;
        prop_assert_eq!(c[0], c64(1.0, 0.0));
        for j in 0..=n {
            let gap = (c[j] - c[n - j]).norm();
            prop_assert!(gap < 1e-9 * (1.0 + c[j].norm()));
        }
    }

    #[test]
    fn polynomial_arithmetic_commutes_with_evaluation(
        a in arb_coeffs(6),
        b in arb_coeffs(6),
        x in arb_x(),
    ) {
        let p = PolynomialC::new(a);
        let q = PolynomialC::new(b);
        let sum = p.add(&q).eval(x);
        prop_assert!((sum - (p.eval(x) + q.eval(x))).norm() < 1e-10 * (1.0 + sum.norm()));
        let prod = p.mul(&q).eval(x);
        prop_assert!((prod - p.eval(x) * q.eval(x)).norm() < 1e-10 * (1.0 + prod.norm()));
        let scaled = p.scale(c64(0.7, -0.3)).eval(x);
        prop_assert!((scaled - c64(0.7, -0.3) * p.eval(x)).norm() < 1e-12 * (1.0 + scaled.norm()));
    }

    #[test]
    fn parity_compression_inverts_even_padding(a in arb_coeffs(5), x in arb_x()) {
        // Build an even polynomial p(E) = q(E²); compressing recovers q.
        let mut padded = Vec::new();
        for (i, &c) in a.iter().enumerate() {
            if i > 0 {
                padded.push(c64(0.0, 0.0));
            }
            padded.push(c);
        }
        let q = PolynomialC::new(a.clone());
        let p = PolynomialC::new(padded);
        prop_assert!(p.parity_residual(0) == 0.0);
        let back = p.compress_parity(0);
        let gap = (back.eval(x) - q.eval(x)).norm();
        prop_assert!(gap < 1e-12 * (1.0 + q.eval(x).norm()));
    }

    #[test]
    fn multiset_match_is_zero_on_permutations(
        a in prop::collection::vec((-5i32..5, -5i32..5), 1..8),
        rot in 0usize..8,
    ) {
        let xs: Vec<C> = a.iter().map(|&(re, im)| c64(re as f64, im as f64)).collect();
        let mut ys = xs.clone();
        let by = rot % ys.len().max(1);
        ys.rotate_left(by);
        prop_assert_eq!(multiset_match(&xs, &ys), Some(0.0));
        // Mismatched sizes are rejected rather than silently matched.
        if !xs.is_empty() {
            prop_assert_eq!(multiset_match(&xs, &ys[1..]), None);
        }
    }

    #[test]
    fn trimming_never_changes_values_beyond_tolerance(a in arb_coeffs(7), x in arb_x()) {
        let p = PolynomialC::new(a);
        let t = p.trimmed(1e-12);
        let gap = (t.eval(x) - p.eval(x)).norm();
        prop_assert!(gap < 1e-10 * (1.0 + p.max_mag()));
    }
}
