//! Lax-pair checks beyond the acceptance gate: the Lax relation at several
//! spectral parameters and spins, the characteristic decomposition at the
//! alternate parameter pair, dual-monodromy eigenvectors on fibre points,
//! and the partial-fraction identity behind the pair's construction.

use lamecurve::curve::fibre_over_zeta;
use lamecurve::lax::{
    cauchy_residual, char_decompose, dual_build, lax_build, lax_residual, max_entry,
};
use lamecurve::theta::c64;
use lamecurve::transfer::t_top_zero;
use lamecurve::EllipticContext;
use nalgebra::DMatrix;

fn ctx(ell: u32) -> EllipticContext {
    EllipticContext::default_params(ell).expect("default parameters are valid")
}

fn ctx_alt(ell: u32) -> EllipticContext {
    EllipticContext::new(ell, c64(0.081, 0.043), c64(-0.15, 0.95))
        .expect("alternate parameters are valid")
}

#[test]
fn lax_relation_holds_across_spins_and_spectral_parameters() {
    for ell in 1..=3u32 {
        let c = ctx(ell);
        for (i, z) in [c64(0.77, -0.31), c64(1.4, 0.6), c64(0.2, 1.1)].into_iter().enumerate() {
            let r = lax_residual(&c, z, 4, 37 + i as u64).unwrap();
            assert!(r < 1e-9, "spin {ell}, z = {z}: Lax residual {r:.3e}");
        }
    }
}

#[test]
fn lax_matrices_have_the_shift_block_structure() {
    let c = ctx(2);
    let pair = lax_build(&c).unwrap();
    let n = pair.size();
    assert_eq!(n, 2 * c.ell as usize + 1);
    let a = pair.a_mat(c64(0.21, 0.11), c64(0.9, 0.4)).unwrap();
    // Top row: the odd coefficients over z at even columns, zero elsewhere.
    for j in 0..n {
        if j % 2 == 0 {
            assert!(a[(0, j)].norm() > 0.0, "missing coefficient at (0, {j})");
        } else {
            assert_eq!(a[(0, j)].norm(), 0.0, "unexpected entry at (0, {j})");
        }
    }
    // Rows 1..n: the shift-down identity block, exactly one 1 per row.
    for i in 1..n {
        for j in 0..n {
            if j + 1 == i {
                assert_eq!(a[(i, j)], c64(1.0, 0.0), "shift entry at ({i}, {j})");
            } else {
                assert_eq!(a[(i, j)].norm(), 0.0, "unexpected entry at ({i}, {j})");
            }
        }
    }
}

#[test]
fn closed_form_inverse_matches_direct_inversion() {
    for ell in 1..=3u32 {
        let c = ctx(ell);
        let pair = lax_build(&c).unwrap();
        let x = c64(0.17, 0.13);
        let z = c64(1.2, -0.4);
        let a = pair.a_mat(x, z).unwrap();
        let inv = pair.a_inv_closed(x, z).unwrap();
        let prod = &a * &inv;
        let id: DMatrix<lamecurve::C> = DMatrix::identity(pair.size(), pair.size());
        let r = max_entry(&(&prod - &id));
        assert!(r < 1e-12, "spin {ell}: inverse residual {r:.3e}");
    }
}

#[test]
fn characteristic_decomposition_holds_at_the_alternate_parameters() {
    for ell in 1..=2u32 {
        let c = ctx_alt(ell);
        let elli = ell as i64;
        let dec = char_decompose(&c, c64(0.171, 0.093)).unwrap();
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        let alpha_pred = sign * c.ebin(2 * elli, elli).unwrap();
        let ra = (dec.alpha - alpha_pred).norm() / (1.0 + alpha_pred.norm());
        assert!(ra < 1e-8, "spin {ell}: z-coefficient deviates {ra:.3e}");
        let fe = c.efac(elli).unwrap();
        let t_pred = t_top_zero(&c).unwrap().scale(-sign / (fe * fe));
        let rf = dec.f.rel_diff(&t_pred);
        assert!(rf < 1e-8, "spin {ell}: z-free part deviates {rf:.3e}");
    }
}

#[test]
fn dual_monodromy_has_fibre_eigenvectors() {
    // (Ψ(x), Ψ(x+η)) is an eigenvector of 𝓐(x,E) with eigenvalue z.
    for ell in 1..=2u32 {
        let c = ctx(ell);
        let dual = dual_build(&c).unwrap();
        let fibre = fibre_over_zeta(&c, c64(0.29, 0.13)).unwrap();
        for sol in fibre.iter().take(3) {
            let z = sol.a_top_eigenvalue(&c).unwrap();
            let x0 = c64(0.171, 0.093);
            let a = dual.curly_a(x0, sol.point.e).unwrap();
            let v = DMatrix::from_fn(2, 1, |j, _| {
                (sol.psi_big)(x0 + (j as f64) * c.eta).unwrap()
            });
            let av = &a * &v;
            let zv = v.map(|t| z * t);
            let r = max_entry(&(&av - &zv)) / max_entry(&zv).max(1e-300);
            assert!(r < 1e-8, "spin {ell}: eigenvector residual {r:.3e}");
        }
    }
}

#[test]
fn partial_fraction_identity_holds_for_several_pole_counts() {
    let c = ctx(2);
    let zeta = c64(0.41, 0.19);
    for (i, n) in [2usize, 4, 6].into_iter().enumerate() {
        let xs: Vec<lamecurve::C> = (0..n)
            .map(|k| c64(0.08 + 0.07 * k as f64, 0.03 + 0.028 * (i + k) as f64))
            .collect();
        let r = cauchy_residual(&c, &xs, zeta).unwrap();
        assert!(r < 1e-8, "{n} poles: identity residual {r:.3e}");
    }
}
