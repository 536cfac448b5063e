//! Transfer-polynomial checks beyond the acceptance gate: the closed-form
//! goldens at a second parameter pair, the level-by-level identifications
//! between the commuting family and the transfer family, the dual-route
//! construction of the family polynomials, and the fusion recurrence.

use lamecurve::curve::fibre_over_zeta;
use lamecurve::polyalg::PolynomialC;
use lamecurve::theta::c64;
use lamecurve::transfer::{a_poly_route_residual, at_identification, fusion_check, t_top_zero};
use lamecurve::verify::taa_residuals;
use lamecurve::EllipticContext;

fn ctx(ell: u32) -> EllipticContext {
    EllipticContext::default_params(ell).expect("default parameters are valid")
}

fn ctx_alt(ell: u32) -> EllipticContext {
    EllipticContext::new(ell, c64(0.081, 0.043), c64(-0.15, 0.95))
        .expect("alternate parameters are valid")
}

/// T₃(0,E) = −[1]²·(E³ − ([1][4]/([2][3]) + [2]⁴/([1]³[3]))·E).
fn golden_cubic(c: &EllipticContext) -> PolynomialC {
    let n = |k: i64| c.en(k);
    let z = c64(0.0, 0.0);
    let s =
        n(1) * n(4) / (n(2) * n(3)) + n(2) * n(2) * n(2) * n(2) / (n(1) * n(1) * n(1) * n(3));
    PolynomialC::new(vec![z, s, z, -c64(1.0, 0.0)]).scale(n(1) * n(1))
}

/// T₅(0,E) = [1]²[2]²·(E⁵ + (3[4]/[2] − [2]⁴/[1]⁴)·E³
///            + ([4]²/[2]² + [3]³/[1]³ − [1][6]/([2][3]))·E).
fn golden_quintic(c: &EllipticContext) -> PolynomialC {
    let n = |k: i64| c.en(k);
    let z = c64(0.0, 0.0);
    let a3 = 3.0 * n(4) / n(2) - n(2) * n(2) * n(2) * n(2) / (n(1) * n(1) * n(1) * n(1));
    let a1 = n(4) * n(4) / (n(2) * n(2)) + n(3) * n(3) * n(3) / (n(1) * n(1) * n(1))
        - n(1) * n(6) / (n(2) * n(3));
    PolynomialC::new(vec![z, a1, z, a3, z, c64(1.0, 0.0)]).scale(n(1) * n(1) * n(2) * n(2))
}

#[test]
fn top_transfer_goldens_hold_at_both_parameter_pairs() {
    for make in [ctx as fn(u32) -> EllipticContext, ctx_alt] {
        let c1 = make(1);
        let r = t_top_zero(&c1).unwrap().rel_diff(&golden_cubic(&c1));
        assert!(r < 1e-9, "cubic deviates {r:.3e}");
        let c2 = make(2);
        let r = t_top_zero(&c2).unwrap().rel_diff(&golden_quintic(&c2));
        assert!(r < 1e-9, "quintic deviates {r:.3e}");
    }
}

#[test]
fn top_transfer_has_odd_parity_and_factorial_lead() {
    for ell in 1..=4u32 {
        let c = ctx(ell);
        let t = t_top_zero(&c).unwrap();
        let deg = 2 * ell as usize + 1;
        assert_eq!(t.trimmed(1e-9 * t.max_mag()).degree(), Some(deg));
        assert!(t.parity_residual(1) < 1e-12, "spin {ell}: parity");
        let f = c.efac(ell as i64).unwrap();
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        let lead = sign * f * f;
        let r = (t.coeff(deg) - lead).norm() / lead.norm();
        assert!(r < 1e-10, "spin {ell}: leading coefficient deviates {r:.3e}");
    }
}

#[test]
fn family_and_transfer_polynomials_identify_level_by_level() {
    for ell in 1..=3u32 {
        let c = ctx(ell);
        for s in 0..=2 * ell as i64 {
            let r = at_identification(&c, s).unwrap();
            assert!(r < 1e-9, "spin {ell}, level {s}: identification {r:.3e}");
        }
    }
}

#[test]
fn family_polynomial_routes_agree() {
    // Recurrence construction vs the bordered-determinant construction.
    for ell in 1..=4u32 {
        let c = ctx(ell);
        for j in 0..=ell as i64 {
            let r = a_poly_route_residual(&c, j).unwrap();
            assert!(r < 1e-9, "spin {ell}, index {j}: route gap {r:.3e}");
        }
    }
}

#[test]
fn fusion_recurrence_holds_at_generic_levels() {
    for ell in 1..=2u32 {
        let c = ctx(ell);
        for sigma in 1..=2 * ell as i64 {
            let r = fusion_check(&c, sigma, c64(0.27, 0.15), 7 + sigma as u64).unwrap();
            assert!(r < 1e-9, "spin {ell}, level {sigma}: fusion residual {r:.3e}");
        }
    }
}

#[test]
fn end_of_family_sum_matches_top_transfer_on_fibre_points() {
    // [2ℓ]!·(z + z̄) = T_{2ℓ+1}(0, E) both as eigenvalues and as operators.
    for ell in 1..=2u32 {
        let c = ctx(ell);
        let fibre = fibre_over_zeta(&c, c64(0.23, 0.17)).unwrap();
        for sol in &fibre {
            let (value_route, op_route) = taa_residuals(&c, sol).unwrap();
            assert!(value_route < 1e-8, "spin {ell}: value route {value_route:.3e}");
            assert!(op_route < 1e-8, "spin {ell}: operator route {op_route:.3e}");
        }
    }
}
