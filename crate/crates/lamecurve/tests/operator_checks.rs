//! Difference-operator checks beyond the acceptance gate: the distinguished
//! members of the commuting family, parity conjugation, the quadratic algebra
//! at the extreme half-integer spins, intertwiners for odd twice-spin, and
//! the verification suites themselves run end to end for every spin.

use lamecurve::diffop::{
    build_a, build_intertwiner, build_sklyanin, op_residual, shift_merge_abs, theta_basis,
    DifferenceOperator, TestFunctionFamily,
};
use lamecurve::theta::c64;
use lamecurve::verify::{annihilation_worst, prop51_membership, run_suite, s3_worst, skl6_worst, Suite};
use lamecurve::EllipticContext;

fn ctx(ell: u32) -> EllipticContext {
    EllipticContext::default_params(ell).expect("default parameters are valid")
}

#[test]
fn family_member_at_the_normalization_point_is_the_identity() {
    for ell in 1..=3u32 {
        let c = ctx(ell);
        let a = build_a(&c, (ell as f64) * c.eta).unwrap();
        let id = DifferenceOperator::identity(shift_merge_abs(&c));
        let mut fam = TestFunctionFamily::new(11);
        let r = op_residual(&a, &id, &mut fam, 3, 5).unwrap();
        assert!(r < 1e-9, "spin {ell}: identity member deviates {r:.3e}");
    }
}

#[test]
fn family_member_next_to_the_top_is_the_scaled_generator() {
    for ell in 1..=3u32 {
        let c = ctx(ell);
        let elli = ell as i64;
        let a = build_a(&c, ((elli - 1) as f64) * c.eta).unwrap();
        let s0 = build_sklyanin(&c, 0, 2 * elli)
            .unwrap()
            .scale(c.en(elli) / c.en(2 * elli));
        let mut fam = TestFunctionFamily::new(13);
        let r = op_residual(&a, &s0, &mut fam, 3, 5).unwrap();
        assert!(r < 1e-9, "spin {ell}: generator member deviates {r:.3e}");
    }
}

#[test]
fn parity_conjugation_reflects_the_spectral_parameter() {
    for ell in 1..=3u32 {
        let c = ctx(ell);
        let lam = c64(0.31, 0.21);
        let lhs = build_a(&c, lam).unwrap().parity_conjugate();
        let rhs = build_a(&c, -lam).unwrap();
        let mut fam = TestFunctionFamily::new(17);
        let r = op_residual(&lhs, &rhs, &mut fam, 3, 5).unwrap();
        assert!(r < 1e-9, "spin {ell}: parity conjugation deviates {r:.3e}");
    }
}

#[test]
fn quadratic_algebra_holds_at_the_extreme_spins() {
    // Spin 1/2 (the structural minimum) and spin 5/2.
    let c = ctx(2);
    for twice_spin in [1i64, 5] {
        let r = skl6_worst(&c, twice_spin, 3, 5, 19).unwrap();
        assert!(
            r < 1e-9,
            "twice-spin {twice_spin}: quadratic-algebra residual {r:.3e}"
        );
    }
}

#[test]
fn intertwining_holds_for_odd_twice_spin_on_a_larger_host() {
    let c = ctx(3);
    let r = s3_worst(&c, 5, 3, 4, 23).unwrap();
    assert!(r < 1e-9, "twice-spin 5: intertwining residual {r:.3e}");
}

#[test]
fn intertwiner_annihilates_the_even_theta_space_for_spin_three() {
    let c = ctx(3);
    let basis = theta_basis(&c, 29).unwrap();
    assert_eq!(basis.len(), 7);
    let w = build_intertwiner(&c, 6).unwrap();
    let r = annihilation_worst(&w, &basis, 5, 29).unwrap();
    assert!(r < 1e-8, "annihilation residual {r:.3e}");
}

#[test]
fn family_action_stays_inside_the_even_theta_space_for_spin_three() {
    let c = ctx(3);
    let r = prop51_membership(&c, c64(0.27, 0.19), 31).unwrap();
    assert!(r < 1e-8, "membership residual {r:.3e}");
}

#[test]
fn intertwiner_rejects_nonpositive_twice_spin() {
    let c = ctx(1);
    assert!(build_intertwiner(&c, 0).is_err());
    assert!(build_intertwiner(&c, -2).is_err());
}

#[test]
fn verification_suites_pass_for_every_supported_spin() {
    for ell in 1..=4u32 {
        let c = ctx(ell);
        for suite in Suite::all() {
            let rows = run_suite(&c, suite, 42).unwrap();
            assert!(!rows.is_empty(), "spin {ell}: {} produced no rows", suite.name());
            for row in &rows {
                assert!(
                    row.pass,
                    "spin {ell}, suite {}: {} = {:.3e} exceeds {:.1e}",
                    suite.name(),
                    row.name,
                    row.residual,
                    row.threshold
                );
            }
        }
    }
}
