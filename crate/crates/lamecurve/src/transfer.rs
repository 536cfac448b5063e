//! Transfer-matrix eigenvalue polynomials T_s(u, E), the commuting-family
//! polynomials A_{jη}(E), the top polynomial T_{2ℓ+1}(0, E), and the
//! Q-function helpers.
//!
//! Every polynomial here is computed by two independent routes and the
//! routes must agree: A_{jη} by a three-term recurrence against a tridiagonal
//! determinant, and T_s by the determinant against the fusion recurrence at
//! seeded spectral values.  Route disagreement is an error, not a warning.

use crate::diffop::FnC;
use crate::error::{Error, Result};
use crate::polyalg::{extract_poly, PolynomialC, TridiagBordered};
use crate::theta::{c64, C, EllipticContext};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The transfer-matrix eigenvalue polynomial T_s(u, E).
#[derive(Debug, Clone)]
pub struct TransferPoly {
    /// Fusion level s ≥ 0.
    pub s: i64,
    /// Spectral argument u.
    pub u: C,
    /// Polynomial in E (degree s for generic u).
    pub poly: PolynomialC,
}

/// The commuting-family polynomial A_{jη}(E).
#[derive(Debug, Clone)]
pub struct APoly {
    /// Shift index j, |j| ≤ ℓ.
    pub j: i64,
    /// Polynomial in E of degree ℓ − |j|.
    pub poly: PolynomialC,
}

/// A_{(ℓ−s)η}(E) for s = 0..ℓ by the three-term recurrence
///
/// ```text
/// A_{ℓη} = 1,  A_{(ℓ−1)η} = ([ℓ]/[2ℓ]) E,
/// A_{(ℓ−t−1)η} = ([ℓ−t]/[2ℓ−t]) E A_{(ℓ−t)η} + ([t]/[2ℓ−t]) A_{(ℓ−t+1)η}.
/// ```
///
/// Returns the whole ladder `[A_{ℓη}, A_{(ℓ−1)η}, …, A_{(ℓ−s_max)η}]`, which
/// the fibre computations reuse wholesale.
pub fn a_polys_all(ctx: &EllipticContext, s_max: i64) -> Result<Vec<PolynomialC>> {
    if !(0..=ctx.ell as i64).contains(&s_max) {
        return Err(Error::Domain(format!(
            "A-polynomial ladder depth {s_max} outside 0..ell"
        )));
    }
    let ell = ctx.ell as i64;
    let e_poly = PolynomialC::monomial(c64(1.0, 0.0), 1);
    let mut polys = vec![PolynomialC::constant(c64(1.0, 0.0))];
    if s_max >= 1 {
        polys.push(e_poly.scale(ctx.en(ell) / ctx.en(2 * ell)));
    }
    for t in 1..s_max {
        let p1 = e_poly
            .mul(&polys[t as usize])
            .scale(ctx.en(ell - t) / ctx.en(2 * ell - t));
        let p2 = polys[(t - 1) as usize].scale(ctx.en(t) / ctx.en(2 * ell - t));
        polys.push(p1.add(&p2));
    }
    Ok(polys)
}

/// A_{(ℓ−s)η}(E) by the tridiagonal determinant route: an s×s matrix with
/// diagonal E, superdiagonal −[i]/[ℓ−i] and subdiagonal [2ℓ−i+1]/[ℓ−i]
/// (at the band position below row i+1), scaled by [ℓ;s]/[2ℓ;s].
fn a_poly_det(ctx: &EllipticContext, s: i64) -> Result<PolynomialC> {
    if s == 0 {
        return Ok(PolynomialC::constant(c64(1.0, 0.0)));
    }
    let ell = ctx.ell as i64;
    let n = s as usize;
    let diag = vec![PolynomialC::monomial(c64(1.0, 0.0), 1); n];
    let mut sup = Vec::with_capacity(n - 1);
    let mut sub = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let kk = k as i64;
        sup.push(-ctx.en(kk + 1) / ctx.en(ell - kk));
        sub.push(ctx.en(2 * ell - kk) / ctx.en(ell - 1 - kk));
    }
    let det = TridiagBordered { diag, sub, sup, last_row: None }.det()?;
    Ok(det.scale(ctx.ebin(ell, s)? / ctx.ebin(2 * ell, s)?))
}

/// The commuting-family polynomial A_{jη}(E), |j| ≤ ℓ, computed by the
/// recurrence and cross-checked against the determinant route to 1e−10.
pub fn a_poly(ctx: &EllipticContext, j: i64) -> Result<APoly> {
    let ell = ctx.ell as i64;
    if j.abs() > ell {
        return Err(Error::Domain(format!("A-polynomial index |{j}| > ell = {ell}")));
    }
    let s = ell - j.abs();
    let rec = a_polys_all(ctx, s)?.pop().expect("ladder non-empty");
    let det = a_poly_det(ctx, s)?;
    let diff = rec.rel_diff(&det);
    if diff > 1e-10 {
        return Err(Error::Consistency(format!(
            "A_({j}η) recurrence and determinant routes disagree: rel diff {diff:.3e}"
        )));
    }
    Ok(APoly { j, poly: rec })
}

/// Raw determinant route for T_s(u, E): an s×s tridiagonal determinant with
///
/// ```text
/// diag_i  = E θ₁(u + (s+1−2i)η),
/// sup_i   = θ₁(u + (s−2ℓ−1−2i)η),   sub_i = θ₁(u + (s+2ℓ+3−2i)η),
/// ```
///
/// divided for s > 2ℓ by Π_{i=1}^{s−2ℓ} θ₁(u + (2ℓ+2i−s−1)η) (the division
/// is exact: those factors divide the determinant).  No consistency check is
/// performed here.
fn t_poly_raw(ctx: &EllipticContext, s: i64, u: C) -> Result<PolynomialC> {
    if s < 0 {
        return Err(Error::Domain(format!("transfer level {s} must be >= 0")));
    }
    if s == 0 {
        return Ok(PolynomialC::constant(c64(1.0, 0.0)));
    }
    let ell = ctx.ell as i64;
    let n = s as usize;
    let mut diag = Vec::with_capacity(n);
    for i in 1..=s {
        let v = ctx.theta1(u + ((s + 1 - 2 * i) as f64) * ctx.eta);
        diag.push(PolynomialC::monomial(v, 1));
    }
    let mut sup = Vec::with_capacity(n.saturating_sub(1));
    let mut sub = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..s - 1 {
        sup.push(ctx.theta1(u + ((s - 2 * ell - 3 - 2 * k) as f64) * ctx.eta));
        sub.push(ctx.theta1(u + ((s + 2 * ell - 1 - 2 * k) as f64) * ctx.eta));
    }
    let det = TridiagBordered { diag, sub, sup, last_row: None }.det()?;
    if s <= 2 * ell {
        return Ok(det);
    }
    let mut pref = c64(1.0, 0.0);
    for i in 1..=(s - 2 * ell) {
        let arg = u + ((2 * ell + 2 * i - s - 1) as f64) * ctx.eta;
        ctx.guard_theta1_arg(arg)?;
        pref *= ctx.theta1(arg);
    }
    Ok(det.scale(c64(1.0, 0.0) / pref))
}

/// One instance of the fusion relation at level σ and parameter v,
///
/// ```text
/// T₁(v−ση) T_σ(v+η) = ρ₊ T_{σ+1}(v) + ρ₋ T_{σ−1}(v+2η),
/// ρ₊ = 1,              ρ₋ = θ₁(v−ση−2ℓη) θ₁(v−ση+2(ℓ+1)η)   (σ < 2ℓ),
/// ρ₊ = θ₁(v),          ρ₋ = θ₁(v+2η) θ₁(v−4ℓη)               (σ = 2ℓ),
/// ρ₊ = θ₁(v−ση+2ℓη),  ρ₋ = θ₁(v−ση−2ℓη)                      (σ > 2ℓ),
/// ```
///
/// evaluated at seeded E values; returns the worst normalized residual.
fn fusion_instance(ctx: &EllipticContext, sigma: i64, v: C, es: &[C]) -> Result<f64> {
    let ell = ctx.ell as i64;
    let eta = ctx.eta;
    let p_t1 = t_poly_raw(ctx, 1, v - (sigma as f64) * eta)?;
    let p_sig = t_poly_raw(ctx, sigma, v + eta)?;
    let p_up = t_poly_raw(ctx, sigma + 1, v)?;
    let p_dn = t_poly_raw(ctx, sigma - 1, v + 2.0 * eta)?;
    let (rho_p, rho_m) = if sigma < 2 * ell {
        (
            c64(1.0, 0.0),
            ctx.theta1(v - (sigma as f64) * eta - 2.0 * (ell as f64) * eta)
                * ctx.theta1(v - (sigma as f64) * eta + 2.0 * ((ell + 1) as f64) * eta),
        )
    } else if sigma == 2 * ell {
        (
            ctx.theta1(v),
            ctx.theta1(v + 2.0 * eta) * ctx.theta1(v - 4.0 * (ell as f64) * eta),
        )
    } else {
        (
            ctx.theta1(v - (sigma as f64) * eta + 2.0 * (ell as f64) * eta),
            ctx.theta1(v - (sigma as f64) * eta - 2.0 * (ell as f64) * eta),
        )
    };
    let mut worst = 0.0_f64;
    for &e in es {
        let lhs = p_t1.eval(e) * p_sig.eval(e);
        let rhs = rho_p * p_up.eval(e) + rho_m * p_dn.eval(e);
        worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm() + rhs.norm()));
    }
    Ok(worst)
}

/// The transfer polynomial T_s(u, E) by the determinant route, verified
/// against the fusion recurrence at five seeded E values to 1e−9.  When the
/// natural fusion instance (level s at parameter u−η) runs into a θ₁ pole,
/// the check falls back to the instance at level s−1 and parameter u, which
/// features T_s(u) on its right-hand side.
pub fn t_poly(ctx: &EllipticContext, s: i64, u: C) -> Result<TransferPoly> {
    let poly = t_poly_raw(ctx, s, u)?;
    if s >= 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED ^ (s as u64));
        let es: Vec<C> = (0..5)
            .map(|_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let resid = match fusion_instance(ctx, s, u - ctx.eta, &es) {
            Ok(r) => r,
            Err(Error::Pole { .. }) if s >= 2 => match fusion_instance(ctx, s - 1, u, &es) {
                Ok(r) => r,
                Err(Error::Pole { arg, dist }) => {
                    return Err(Error::NumericalLimit(format!(
                        "fusion cross-check for T_{s}({u}) hit theta1 poles on both \
                         instances (last at arg {arg}, distance {dist:.1e})"
                    )))
                }
                Err(e) => return Err(e),
            },
            Err(e) => return Err(e),
        };
        if resid > 1e-9 {
            return Err(Error::Consistency(format!(
                "T_{s}({u}) determinant route fails the fusion recurrence: residual {resid:.3e}"
            )));
        }
    }
    Ok(TransferPoly { s, u, poly })
}

/// T_{2ℓ+1}(0, E): the top transfer polynomial at u = 0, where the
/// determinant route's prefactor θ₁(u) vanishes but the quotient stays
/// holomorphic.  The u → 0 limit is taken by symmetric Richardson
/// extrapolation, F(δ) = (T(δ,E)+T(−δ,E))/2 and (4F(δ/2) − F(δ))/3 with
/// δ = 1e−3, realized through [`extract_poly`] in E on the unit circle.
/// A second run at δ' = δ/2 must agree to 1e−8, otherwise the extrapolation
/// is declared unstable.
pub fn t_top_zero(ctx: &EllipticContext) -> Result<PolynomialC> {
    let s_top = 2 * ctx.ell as i64 + 1;
    let richardson = |delta: f64| -> Result<PolynomialC> {
        let nodes = [
            t_poly_raw(ctx, s_top, c64(delta, 0.0))?,
            t_poly_raw(ctx, s_top, c64(-delta, 0.0))?,
            t_poly_raw(ctx, s_top, c64(delta / 2.0, 0.0))?,
            t_poly_raw(ctx, s_top, c64(-delta / 2.0, 0.0))?,
        ];
        let f = |e: C| -> Result<C> {
            let f_big = (nodes[0].eval(e) + nodes[1].eval(e)) / 2.0;
            let f_sml = (nodes[2].eval(e) + nodes[3].eval(e)) / 2.0;
            Ok((4.0 * f_sml - f_big) / 3.0)
        };
        extract_poly(f, s_top as usize, 1.0, ctx.tol.interp_tol)
    };
    let p1 = richardson(1e-3)?;
    let p2 = richardson(5e-4)?;
    let diff = p1.rel_diff(&p2);
    if diff > 1e-8 {
        return Err(Error::NumericalLimit(format!(
            "Richardson extrapolation of T_top unstable: delta halving moved \
             coefficients by {diff:.3e}"
        )));
    }
    Ok(p2)
}

/// Coefficient-wise relative difference between A_{(ℓ−s)η}(E) and the
/// identified transfer polynomial ([2ℓ−s]!/[2ℓ]!)·T_s(u, E) at
/// u = (2ℓ−s+1)η, for 0 ≤ s ≤ 2ℓ.
pub fn at_identification(ctx: &EllipticContext, s: i64) -> Result<f64> {
    let ell = ctx.ell as i64;
    if !(0..=2 * ell).contains(&s) {
        return Err(Error::Domain(format!("AT identification needs 0 <= s <= 2ell, got {s}")));
    }
    let a = a_poly(ctx, ell - s)?;
    let u = ((2 * ell - s + 1) as f64) * ctx.eta;
    let t = t_poly(ctx, s, u)?;
    let scaled = t.poly.scale(ctx.efac(2 * ell - s)? / ctx.efac(2 * ell)?);
    Ok(a.poly.rel_diff(&scaled))
}

/// Coefficient-wise relative difference between the recurrence and
/// determinant routes for A_{jη}(E) — the dual-route residual that
/// [`a_poly`] enforces, exposed for reporting.
pub fn a_poly_route_residual(ctx: &EllipticContext, j: i64) -> Result<f64> {
    let ell = ctx.ell as i64;
    if j.abs() > ell {
        return Err(Error::Domain(format!("A-polynomial index |{j}| > ell = {ell}")));
    }
    let s = ell - j.abs();
    let rec = a_polys_all(ctx, s)?.pop().expect("ladder non-empty");
    let det = a_poly_det(ctx, s)?;
    Ok(rec.rel_diff(&det))
}

/// Worst normalized residual of the fusion recurrence instance at level
/// σ ≥ 1 and parameter v over five seeded E values.
pub fn fusion_check(ctx: &EllipticContext, sigma: i64, v: C, seed: u64) -> Result<f64> {
    if sigma < 1 {
        return Err(Error::Domain(format!("fusion level {sigma} must be >= 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let es: Vec<C> = (0..5)
        .map(|_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    fusion_instance(ctx, sigma, v, &es)
}

/// The Q-function value Q(u) = Ψ(u/2) / Ψ(ℓη) of a Bloch eigenfunction Ψ.
/// A vanishing normalizer Ψ(ℓη) is a normalization error.
pub fn q_value(psi_big: &FnC, ctx: &EllipticContext, u: C) -> Result<C> {
    let norm = psi_big((ctx.ell as f64) * ctx.eta)?;
    let val = psi_big(u / 2.0)?;
    if norm.norm() < 1e-12 * (1.0 + val.norm()) {
        return Err(Error::Normalization(format!(
            "Q-function normalizer Psi(ell*eta) = {norm} is numerically zero"
        )));
    }
    Ok(val / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn ctx(ell: u32) -> EllipticContext {
        EllipticContext::default_params(ell).unwrap()
    }

    #[test]
    fn a_poly_initial_conditions_and_symmetry() {
        let c = ctx(3);
        let ell = c.ell as i64;
        let top = a_poly(&c, ell).unwrap();
        assert_eq!(top.poly.degree(), Some(0));
        assert!((top.poly.coeff(0) - c64(1.0, 0.0)).norm() < 1e-15);
        let next = a_poly(&c, ell - 1).unwrap();
        assert_eq!(next.poly.degree(), Some(1));
        assert!((next.poly.coeff(1) - c.en(ell) / c.en(2 * ell)).norm() < 1e-14);
        assert!(next.poly.coeff(0).norm() < 1e-15);
        for j in 1..=ell {
            let p = a_poly(&c, j).unwrap();
            let m = a_poly(&c, -j).unwrap();
            assert!(p.poly.rel_diff(&m.poly) < 1e-15);
        }
        assert!(a_poly(&c, ell + 1).is_err());
    }

    #[test]
    fn a_poly_parity() {
        let c = ctx(3);
        let ell = c.ell as i64;
        for s in 0..=ell {
            let p = a_poly(&c, ell - s).unwrap().poly.trimmed(1e-12);
            assert_eq!(p.degree(), Some(s as usize), "degree ell - |j|");
            assert!(
                p.parity_residual((s % 2) as usize) < 1e-12,
                "A_(ell-{s}) must have parity {s}"
            );
        }
    }

    #[test]
    fn t_poly_low_levels() {
        let c = ctx(2);
        let u = c64(0.21, 0.13);
        let t0 = t_poly(&c, 0, u).unwrap();
        assert_eq!(t0.poly.degree(), Some(0));
        assert!((t0.poly.coeff(0) - c64(1.0, 0.0)).norm() < 1e-15);
        let t1 = t_poly(&c, 1, u).unwrap();
        assert_eq!(t1.poly.trimmed(1e-12).degree(), Some(1));
        assert!((t1.poly.coeff(1) - c.theta1(u)).norm() < 1e-14 * c.theta1(u).norm());
        assert!(t_poly(&c, -1, u).is_err());
    }

    #[test]
    fn t_poly_high_level_division_is_exact() {
        // s > 2ℓ: the determinant is exactly divisible by the prefactor, so
        // the result is still a degree-s polynomial with finite coefficients.
        let c = ctx(1);
        let u = c64(0.21, 0.13);
        for s in [3i64, 4] {
            let t = t_poly(&c, s, u).unwrap();
            assert_eq!(t.poly.trimmed(1e-12).degree(), Some(s as usize));
            assert!(t.poly.max_mag().is_finite());
        }
    }

    #[test]
    fn t_poly_monodromy_in_u() {
        // T_s(u+1) = (−1)^s T_s(u);
        // T_s(u+τ) = (−1)^s e^{−iπsτ−2πisu} T_s(u)  for 1 ≤ s ≤ 2ℓ.
        let c = ctx(1);
        let u = c64(0.11, 0.21);
        for s in [1i64, 2] {
            let p0 = t_poly(&c, s, u).unwrap().poly;
            let p1 = t_poly(&c, s, u + 1.0).unwrap().poly;
            let pt = t_poly(&c, s, u + c.tau).unwrap().poly;
            let sgn = if s % 2 == 0 { 1.0 } else { -1.0 };
            assert!(p1.rel_diff(&p0.scale(c64(sgn, 0.0))) < 1e-8);
            let ipi = c64(0.0, std::f64::consts::PI);
            let fac = sgn * (-(s as f64) * ipi * c.tau - 2.0 * (s as f64) * ipi * u).exp();
            assert!(pt.rel_diff(&p0.scale(fac)) < 1e-8);
        }
    }

    #[test]
    fn t_top_is_odd_with_predicted_lead() {
        let c = ctx(1);
        let t = t_top_zero(&c).unwrap().trimmed(1e-10);
        assert_eq!(t.degree(), Some(3));
        assert!(t.parity_residual(1) < 1e-10);
        let lead = t.coeff(3);
        let pred = -(c.efac(1).unwrap() * c.efac(1).unwrap());
        assert!((lead - pred).norm() < 1e-10 * pred.norm());
    }

    #[test]
    fn at_identification_small_cases() {
        let c = ctx(2);
        // s = 0: both sides are the constant 1.
        assert!(at_identification(&c, 0).unwrap() < 1e-15);
        for s in 1..=(2 * c.ell as i64) {
            let r = at_identification(&c, s).unwrap();
            assert!(r < 1e-9, "AT s={s}: {r:.3e}");
        }
        assert!(at_identification(&c, 5).is_err());
    }

    #[test]
    fn q_value_normalizes_and_guards() {
        let c = ctx(2);
        let psi: FnC = Arc::new({
            let cc = c.clone();
            move |x| Ok(cc.theta1(x + 0.3))
        });
        let v = q_value(&psi, &c, 2.0 * (c.ell as f64) * c.eta).unwrap();
        assert!((v - c64(1.0, 0.0)).norm() < 1e-15);
        // A Psi vanishing at ℓη triggers the normalization guard.
        let bad: FnC = Arc::new({
            let cc = c.clone();
            move |x| Ok(cc.theta1(x - (cc.ell as f64) * cc.eta))
        });
        assert!(matches!(
            q_value(&bad, &c, c64(0.3, 0.1)),
            Err(Error::Normalization(_))
        ));
    }
}
