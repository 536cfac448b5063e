//! Spectral-curve checks beyond the acceptance gate: coefficient goldens at
//! a second parameter pair for the higher spins, the determinant-polynomial
//! golden at both pairs, assembled-curve invariants, higher-spin fibres,
//! eigenvalue closed forms, and the infinite-point asymptotics report.

use lamecurve::curve::{
    asymptotics_check, curve_coeffs, curve_eval, d_poly, fibre_over_zeta, full_system_residual,
    hyperelliptic, multiset_match, spectral_curve,
};
use lamecurve::polyalg::PolynomialC;
use lamecurve::theta::c64;
use lamecurve::verify::{epsilon_xi_residuals, on_curve_char_residual};
use lamecurve::{C, EllipticContext};

fn ctx(ell: u32) -> EllipticContext {
    EllipticContext::default_params(ell).expect("default parameters are valid")
}

fn ctx_alt(ell: u32) -> EllipticContext {
    EllipticContext::new(ell, c64(0.081, 0.043), c64(-0.15, 0.95))
        .expect("alternate parameters are valid")
}

/// D₂(E) = −([1]/[2])·(−[2]³/[1]³ + ([3]/[2])·E²).
fn golden_d2(c: &EllipticContext) -> PolynomialC {
    let n = |k: i64| c.en(k);
    let c0 = -n(2) * n(2) * n(2) / (n(1) * n(1) * n(1));
    PolynomialC::new(vec![c0, c64(0.0, 0.0), n(3) / n(2)]).scale(-n(1) / n(2))
}

/// D₄(E) = ([1]/[3])·(c0 + c2·E² + c4·E⁴).
fn golden_d4(c: &EllipticContext) -> PolynomialC {
    let n = |k: i64| c.en(k);
    let z = c64(0.0, 0.0);
    let c4 = n(2) * n(5) / (n(3) * n(4));
    let c2 = -(n(2) * n(2) * n(7) / (n(3) * n(4) * n(4))
        + n(4) * n(4) * n(5) / (n(1) * n(2) * n(6))
        + n(2) * n(8) / (n(4) * n(6)));
    let c0 = (n(4) * n(5) / (n(1) * n(6))) * (n(7) / n(5) + n(5) / n(1));
    PolynomialC::new(vec![c0, z, c2, z, c4]).scale(n(1) / n(3))
}

#[test]
fn determinant_polynomial_goldens_hold_at_both_parameter_pairs() {
    for make in [ctx as fn(u32) -> EllipticContext, ctx_alt] {
        let c1 = make(1);
        let r = d_poly(&c1).unwrap().rel_diff(&golden_d2(&c1));
        assert!(r < 1e-9, "spin 1 determinant deviates {r:.3e}");
        let c2 = make(2);
        let r = d_poly(&c2).unwrap().rel_diff(&golden_d4(&c2));
        assert!(r < 1e-9, "spin 2 determinant deviates {r:.3e}");
    }
}

#[test]
fn determinant_polynomial_is_even_for_every_spin() {
    for ell in 1..=4u32 {
        let c = ctx(ell);
        let d = d_poly(&c).unwrap();
        assert_eq!(d.trimmed(1e-9 * d.max_mag()).degree(), Some(2 * ell as usize));
        assert!(d.parity_residual(0) < 1e-12, "spin {ell}: parity");
    }
}

#[test]
fn assembled_curve_passes_its_structural_invariants() {
    for ell in 1..=3u32 {
        let c = ctx(ell);
        let curve = spectral_curve(&c).unwrap();
        let n_big = c.big_n as usize;
        assert_eq!(curve.c.len(), n_big + 1);
        assert_eq!(curve.c[0], c64(1.0, 0.0));
        // Palindrome C_j = C_{N−j}.
        for j in 0..=n_big {
            let gap = (curve.c[j] - curve.c[n_big - j]).norm();
            assert!(gap < 1e-9 * (1.0 + curve.c[j].norm()), "spin {ell}: palindrome");
        }
        assert_eq!(curve.edges_bloch.len(), 2 * (2 * ell as usize + 1));
        assert_eq!(curve.edges_hyper.len(), 2 * (2 * ell as usize + 1));
        let gap = multiset_match(&curve.edges_bloch, &curve.edges_hyper).unwrap();
        assert!(gap < 1e-6, "spin {ell}: cross-route edge gap {gap:.3e}");
    }
}

#[test]
fn higher_spin_fibres_close_and_satisfy_the_full_system() {
    let c = ctx(3);
    let coeffs = curve_coeffs(&c).unwrap();
    let fibre = fibre_over_zeta(&c, c64(0.24, 0.15)).unwrap();
    assert_eq!(fibre.len(), 12); // 2N = ℓ(ℓ+1)
    for sol in &fibre {
        assert!(sol.eigen_residual < 1e-7);
        assert!(sol.glue_residual < 1e-7);
        let (v, scale) = curve_eval(&c, &coeffs, sol.point.zeta, sol.point.k);
        assert!(v.norm() / scale < 1e-8);
        let r = full_system_residual(&c, sol).unwrap();
        assert!(r < 1e-7, "full linear system residual {r:.3e}");
    }
}

#[test]
fn fibre_eigenvalues_come_in_negation_pairs() {
    // The fibre over ζ and the reflected branch produce E-multisets that are
    // symmetric under E → −E once both K signs are kept.
    for ell in 1..=2u32 {
        let c = ctx(ell);
        let fibre = fibre_over_zeta(&c, c64(0.29, 0.13)).unwrap();
        let es: Vec<C> = fibre.iter().map(|s| s.point.e).collect();
        let negated: Vec<C> = es.iter().map(|&e| -e).collect();
        let gap = multiset_match(&es, &negated).unwrap();
        assert!(gap < 1e-8, "spin {ell}: eigenvalue negation gap {gap:.3e}");
    }
}

#[test]
fn adjacent_family_eigenvalues_match_their_closed_forms() {
    // ε and ξ (the A_{(ℓ∓2)η} eigenvalues) against the operator route.
    for ell in 2..=3u32 {
        let c = ctx(ell);
        let fibre = fibre_over_zeta(&c, c64(0.19, 0.23)).unwrap();
        for sol in fibre.iter().take(3) {
            let (re, rx) = epsilon_xi_residuals(&c, sol).unwrap();
            assert!(re < 1e-7, "spin {ell}: lower eigenvalue residual {re:.3e}");
            assert!(rx < 1e-7, "spin {ell}: upper eigenvalue residual {rx:.3e}");
        }
    }
}

#[test]
fn fibre_points_satisfy_the_characteristic_equation() {
    for ell in 1..=2u32 {
        let c = ctx(ell);
        let fibre = fibre_over_zeta(&c, c64(0.31, 0.11)).unwrap();
        for sol in fibre.iter().take(2) {
            let r = on_curve_char_residual(&c, sol, c64(0.171, 0.093)).unwrap();
            assert!(r < 1e-7, "spin {ell}: characteristic residual {r:.3e}");
        }
    }
}

#[test]
fn asymptotics_report_is_clean_for_higher_spins_too() {
    for ell in [3u32] {
        let c = ctx(ell);
        let report = asymptotics_check(&c).unwrap();
        assert!(report.k2_law.1 < 0.005);
        assert!(report.plus_dev.1 < report.plus_dev.0);
        assert!(report.minus_dev.1 < report.minus_dev.0);
    }
}

#[test]
fn hyperelliptic_reduction_matches_its_defining_combination() {
    // w² = [2ℓ;ℓ]²·(T(E)²/[2ℓ]!² − 4·D(E)) must reduce to a polynomial in
    // E² whose value matches the direct combination at generic E.
    for ell in 1..=3u32 {
        let c = ctx(ell);
        let h = hyperelliptic(&c).unwrap();
        let f2 = c.efac(2 * ell as i64).unwrap();
        let binom = c.ebin(2 * ell as i64, ell as i64).unwrap();
        for e in [c64(0.37, 0.21), c64(-0.52, 0.44)] {
            let t = h.t_top.eval(e);
            let want = binom * binom * (t * t / (f2 * f2) - 4.0 * h.d.eval(e));
            let got = h.p.eval(e * e);
            let r = (got - want).norm() / want.norm().max(1e-300);
            assert!(r < 1e-9, "spin {ell}: reduction deviates {r:.3e}");
        }
    }
}
