//! Named verification suites: every operator identity, transfer-polynomial
//! cross-check, curve invariant and Lax relation as a (name, residual,
//! threshold) row.  The CLI `verify` command and the acceptance tests are
//! thin wrappers over these suites.

use crate::curve::{
    asymptotics_check, band_edges_bloch, band_edges_hyper, curve_coeffs, curve_eval,
    curve_residuals, epsilon_xi, fibre_over_zeta, full_system_residual, hyperelliptic,
    minor_residuals, multiplier_residuals, multiset_match, BlochPoint, BlochSolution,
};
use crate::diffop::{
    build_a, build_intertwiner, build_sklyanin, op_annihilation_residual, op_residual,
    shift_merge_abs, theta_basis, DifferenceOperator, TestFunctionFamily,
};
use crate::error::{Error, Result};
use crate::lax::{cauchy_residual, char_decompose, dual_build, lax_residual, max_entry};
use crate::theta::{c64, C, EllipticContext};
use crate::transfer::{
    a_poly_route_residual, at_identification, fusion_check, q_value, t_poly, t_top_zero,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One verification check: a normalized residual against its threshold.
#[derive(Debug, Clone)]
pub struct CheckRow {
    /// Stable row name, unique within a suite.
    pub name: String,
    /// Normalized residual (non-finite values fail).
    pub residual: f64,
    /// Pass threshold.
    pub threshold: f64,
    /// Whether the residual is finite and within the threshold.
    pub pass: bool,
}

impl CheckRow {
    /// Builds a row; non-finite residuals never pass.
    pub fn new(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        CheckRow {
            name: name.into(),
            residual,
            threshold,
            pass: residual.is_finite() && residual <= threshold,
        }
    }
}

/// The four verification suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Operator algebra: Sklyanin relations, the commuting family,
    /// intertwiner identities and theta-space invariance.
    Algebra,
    /// Transfer polynomials: dual routes, fusion, the A↔T identification,
    /// and the Q-function relations.
    Transfer,
    /// Spectral curve: fibres, involutions, band edges, hyperelliptic data
    /// and asymptotics.
    Curve,
    /// Lax pair and dual monodromy.
    Lax,
}

impl Suite {
    /// All suites in canonical order.
    pub fn all() -> [Suite; 4] {
        [Suite::Algebra, Suite::Transfer, Suite::Curve, Suite::Lax]
    }

    /// Stable lowercase name.
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Transfer => "transfer",
            Suite::Curve => "curve",
            Suite::Lax => "lax",
        }
    }
}

/// Runs one suite and returns its rows.
pub fn run_suite(ctx: &EllipticContext, suite: Suite, seed: u64) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::Algebra => suite_algebra(ctx, seed),
        Suite::Transfer => suite_transfer(ctx, seed),
        Suite::Curve => suite_curve(ctx, seed),
        Suite::Lax => suite_lax(ctx, seed),
    }
}

// ---------------------------------------------------------------------------
// Reusable relation residuals (also driven directly by the acceptance tests).
// ---------------------------------------------------------------------------

/// Worst residual over all six Sklyanin relations at the given twice-spin:
/// for each cyclic triple (α, β, γ) of {1,2,3}, with I_ab = θ_{a+1}(0)θ_{b+1}(2η),
///
/// ```text
/// (−1)^{α+1} I_{α0} S_α S₀ = I_{βγ} S_β S_γ − I_{γβ} S_γ S_β,
/// (−1)^{α+1} I_{α0} S₀ S_α = I_{γβ} S_β S_γ − I_{βγ} S_γ S_β.
/// ```
pub fn skl6_worst(
    ctx: &EllipticContext,
    twice_spin: i64,
    n_funcs: usize,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let s: Vec<DifferenceOperator> = (0..4u8)
        .map(|a| build_sklyanin(ctx, a, twice_spin))
        .collect::<Result<_>>()?;
    let th0 = |a: usize| ctx.theta((a + 1) as u8, c64(0.0, 0.0));
    let th2 = |a: usize| ctx.theta((a + 1) as u8, 2.0 * ctx.eta);
    let mut worst = 0.0_f64;
    for (i, (al, be, ga)) in [(1usize, 2usize, 3usize), (2, 3, 1), (3, 1, 2)]
        .into_iter()
        .enumerate()
    {
        let sign = if al % 2 == 1 { 1.0 } else { -1.0 };
        let i_a0 = th0(al)? * th2(0)?;
        let i_bc = th0(be)? * th2(ga)?;
        let i_cb = th0(ga)? * th2(be)?;
        let bg = s[be].compose(&s[ga]);
        let gb = s[ga].compose(&s[be]);
        let lhs1 = s[al].compose(&s[0]).scale(sign * i_a0);
        let rhs1 = bg.scale(i_bc).sub(&gb.scale(i_cb));
        let mut fam = TestFunctionFamily::new(seed ^ (2 * i as u64));
        worst = worst.max(op_residual(&lhs1, &rhs1, &mut fam, n_funcs, n_points)?);
        let lhs2 = s[0].compose(&s[al]).scale(sign * i_a0);
        let rhs2 = bg.scale(i_cb).sub(&gb.scale(i_bc));
        let mut fam = TestFunctionFamily::new(seed ^ (2 * i as u64 + 1));
        worst = worst.max(op_residual(&lhs2, &rhs2, &mut fam, n_funcs, n_points)?);
    }
    Ok(worst)
}

/// Residual of the transfer identity for the commuting family,
/// L A_λ = [θ₁(2λ−2ℓη)/θ₁(2λ)] A_{λ+η} + [θ₁(2λ+2ℓη)/θ₁(2λ)] A_{λ−η}.
pub fn bax1_residual(
    ctx: &EllipticContext,
    lambda: C,
    n_funcs: usize,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let ell = ctx.ell as f64;
    let l_op = build_sklyanin(ctx, 0, 2 * ctx.ell as i64)?;
    let inv = ctx.inv_theta1(2.0 * lambda)?;
    let c1 = ctx.theta1(2.0 * lambda - 2.0 * ell * ctx.eta) * inv;
    let c2 = ctx.theta1(2.0 * lambda + 2.0 * ell * ctx.eta) * inv;
    let lhs = l_op.compose(&build_a(ctx, lambda)?);
    let rhs = build_a(ctx, lambda + ctx.eta)?
        .scale(c1)
        .add(&build_a(ctx, lambda - ctx.eta)?.scale(c2));
    let mut fam = TestFunctionFamily::new(seed);
    op_residual(&lhs, &rhs, &mut fam, n_funcs, n_points)
}

/// Residual of the Wronskian-type relation
/// A_{λ+η}A_{−λ} − A_λA_{−λ−η} = ([2ℓ]!)⁻¹ Π_{j=−ℓ+1}^{ℓ} θ₁(2λ+2jη) · (A_{(ℓ+1)η} − A_{−(ℓ+1)η}).
pub fn wr_residual(
    ctx: &EllipticContext,
    lambda: C,
    n_funcs: usize,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let ell = ctx.ell as i64;
    let eta = ctx.eta;
    let lhs = build_a(ctx, lambda + eta)?
        .compose(&build_a(ctx, -lambda)?)
        .sub(&build_a(ctx, lambda)?.compose(&build_a(ctx, -lambda - eta)?));
    let mut pref = 1.0 / ctx.efac(2 * ell)?;
    for j in (-ell + 1)..=ell {
        pref *= ctx.theta1(2.0 * lambda + 2.0 * (j as f64) * eta);
    }
    let w = build_a(ctx, ((ell + 1) as f64) * eta)?
        .sub(&build_a(ctx, -((ell + 1) as f64) * eta)?);
    let rhs = w.scale(pref);
    let mut fam = TestFunctionFamily::new(seed);
    op_residual(&lhs, &rhs, &mut fam, n_funcs, n_points)
}

/// Residual of the x ↔ λ symmetry (A_λ F)(x) = (A_x F)(λ) on a seeded test
/// function over `n_points` sample pairs.
pub fn symm_residual(
    ctx: &EllipticContext,
    lambda: C,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let a_lam = build_a(ctx, lambda)?;
    let mut fam = TestFunctionFamily::new(seed);
    let f = fam.fourier();
    let mut worst = 0.0_f64;
    let mut accepted = 0usize;
    let mut draws = 0usize;
    while accepted < n_points {
        draws += 1;
        if draws > 4 * n_points {
            return Err(Error::NumericalLimit(
                "symmetry check exhausted its pole-retry budget".into(),
            ));
        }
        let x = fam.point();
        let attempt = (|| -> Result<f64> {
            let v1 = a_lam.apply(&*f, x)?;
            let v2 = build_a(ctx, x)?.apply(&*f, lambda)?;
            Ok((v1 - v2).norm() / (1.0 + v1.norm() + v2.norm()))
        })();
        match attempt {
            Ok(r) => {
                worst = worst.max(r);
                accepted += 1;
            }
            Err(Error::Pole { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

/// Worst residual of the intertwining relation S_a^{(−ℓ−1)} W̌ = W̌ S_a^{(ℓ)}
/// over a = 0..3 at the given twice-spin t (so the modules are spin t/2 and
/// −t/2 − 1).
pub fn s3_worst(
    ctx: &EllipticContext,
    twice_spin: i64,
    n_funcs: usize,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let w = build_intertwiner(ctx, twice_spin)?;
    let mut worst = 0.0_f64;
    for a in 0..4u8 {
        let lhs = build_sklyanin(ctx, a, -twice_spin - 2)?.compose(&w);
        let rhs = w.compose(&build_sklyanin(ctx, a, twice_spin)?);
        let mut fam = TestFunctionFamily::new(seed ^ u64::from(a));
        worst = worst.max(op_residual(&lhs, &rhs, &mut fam, n_funcs, n_points)?);
    }
    Ok(worst)
}

/// Worst annihilation residual of an operator over a basis of Θ⁺₄ℓ,
/// normalized by the addend scale at each point.
pub fn annihilation_worst(
    op: &DifferenceOperator,
    basis: &[crate::diffop::FnC],
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (i, f) in basis.iter().enumerate() {
        let mut fam = TestFunctionFamily::new(seed ^ (i as u64));
        worst = worst.max(op_annihilation_residual(op, f, &mut fam, n_points)?);
    }
    Ok(worst)
}

/// Least-squares membership residual of A_λ F in span(Θ⁺₄ℓ) for the first
/// two basis functions, sampled at a 3(2ℓ+1)-point pole-free grid.
pub fn prop51_membership(ctx: &EllipticContext, lambda: C, seed: u64) -> Result<f64> {
    let basis = theta_basis(ctx, seed ^ 0xB0)?;
    let dim = basis.len();
    let a_lam = build_a(ctx, lambda)?;
    let one = |_x: C| Ok(c64(1.0, 0.0));
    let mut fam = TestFunctionFamily::new(seed ^ 0xB1);
    let mut grid: Vec<C> = Vec::with_capacity(3 * dim);
    let mut draws = 0usize;
    while grid.len() < 3 * dim {
        draws += 1;
        if draws > 12 * dim {
            return Err(Error::NumericalLimit(
                "membership grid sampling exhausted its pole-retry budget".into(),
            ));
        }
        let x = fam.point();
        match a_lam.apply(&one, x) {
            Ok(_) => grid.push(x),
            Err(Error::Pole { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let mut b_mat = DMatrix::from_element(grid.len(), dim, c64(0.0, 0.0));
    for (i, &x) in grid.iter().enumerate() {
        for (j, f) in basis.iter().enumerate() {
            b_mat[(i, j)] = f(x)?;
        }
    }
    let svd = b_mat.clone().svd(true, true);
    let mut worst = 0.0_f64;
    for f in basis.iter().take(2) {
        let mut rhs = DMatrix::from_element(grid.len(), 1, c64(0.0, 0.0));
        for (i, &x) in grid.iter().enumerate() {
            rhs[(i, 0)] = a_lam.apply(&**f, x)?;
        }
        let coef = svd
            .solve(&rhs, 1e-13)
            .map_err(|e| Error::Conditioning(format!("membership least squares failed: {e}")))?;
        let resid = (&b_mat * &coef - &rhs).norm() / rhs.norm().max(1e-300);
        worst = worst.max(resid);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Fibre-based residuals.
// ---------------------------------------------------------------------------

/// The trace identity through the Q-function: residuals of
/// [2ℓ]!(z + z̄) = T_{2ℓ+1}(0, E) by the value route (z, z̄ from Ψ ratios)
/// and by the operator route ([2ℓ]!(A_{(ℓ+1)η} + A_{−(ℓ+1)η})Ψ = T_top(E)Ψ).
pub fn taa_residuals(ctx: &EllipticContext, sol: &BlochSolution) -> Result<(f64, f64)> {
    let ell = ctx.ell as i64;
    let eta = ctx.eta;
    let t_top = t_top_zero(ctx)?;
    let f2 = ctx.efac(2 * ell)?;
    let z = sol.a_top_eigenvalue(ctx)?;
    let norm = (sol.psi_big)((ell as f64) * eta)?;
    let zbar = (sol.psi_big)(-((ell + 1) as f64) * eta)? / norm;
    let rhs = t_top.eval(sol.point.e);
    let lhs = f2 * (z + zbar);
    let value_route = (lhs - rhs).norm() / (lhs.norm() + rhs.norm()).max(1e-300);
    let a_plus = build_a(ctx, ((ell + 1) as f64) * eta)?;
    let a_minus = build_a(ctx, -((ell + 1) as f64) * eta)?;
    let x0 = c64(0.19, 0.11);
    let v = f2 * (a_plus.apply(&*sol.psi_big, x0)? + a_minus.apply(&*sol.psi_big, x0)?);
    let w = rhs * (sol.psi_big)(x0)?;
    let op_route = (v - w).norm() / w.norm().max(1e-300);
    Ok((value_route, op_route))
}

/// Worst residual of the Q-function difference equation
/// θ₁(u−2ℓη) Q(u+2η) + θ₁(u+2ℓη) Q(u−2η) = E θ₁(u) Q(u) at three generic u.
pub fn baxter_residual(ctx: &EllipticContext, sol: &BlochSolution) -> Result<f64> {
    let ell = ctx.ell as f64;
    let eta = ctx.eta;
    let q = |u: C| q_value(&sol.psi_big, ctx, u);
    let mut worst = 0.0_f64;
    for u in [c64(0.21, 0.1), c64(-0.13, 0.23), c64(0.4, -0.05)] {
        let lhs = ctx.theta1(u - 2.0 * ell * eta) * q(u + 2.0 * eta)?
            + ctx.theta1(u + 2.0 * ell * eta) * q(u - 2.0 * eta)?;
        let rhs = sol.point.e * ctx.theta1(u) * q(u)?;
        worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm() + rhs.norm()));
    }
    Ok(worst)
}

/// Worst residual of the Q-to-transfer sum formula at level s over `n_u`
/// seeded spectral parameters:
///
/// ```text
/// Q(u+(s+1)η) Q(u−(s+1)η) / Π_{p=1}^{2ℓ−s} θ₁(u+(2ℓ+1−s−2p)η)
///   · Σ_{j=0}^{s} Π_{q=1}^{2ℓ} θ₁(u+(2ℓ+1+s−2j−2q)η)
///       / (Q(u+(s−2j−1)η) Q(u+(s−2j+1)η))  =  T_s(u, E).
/// ```
pub fn zero_zero_residual(
    ctx: &EllipticContext,
    sol: &BlochSolution,
    s: i64,
    n_u: usize,
    seed: u64,
) -> Result<f64> {
    let ell = ctx.ell as i64;
    if !(1..=2 * ell).contains(&s) {
        return Err(Error::Domain(format!("sum formula needs 1 <= s <= 2ell, got {s}")));
    }
    let eta = ctx.eta;
    let q = |u: C| q_value(&sol.psi_big, ctx, u);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut accepted = 0usize;
    let mut draws = 0usize;
    while accepted < n_u {
        draws += 1;
        if draws > 4 * n_u {
            return Err(Error::NumericalLimit(
                "sum-formula check exhausted its resampling budget".into(),
            ));
        }
        let u = c64(rng.random_range(0.05..0.6), rng.random_range(0.02..0.35));
        let attempt = (|| -> Result<f64> {
            let mut pref = q(u + ((s + 1) as f64) * eta)? * q(u - ((s + 1) as f64) * eta)?;
            for p in 1..=(2 * ell - s) {
                pref /= ctx.theta1(u + ((2 * ell + 1 - s - 2 * p) as f64) * eta);
            }
            let mut tot = c64(0.0, 0.0);
            for j in 0..=s {
                let mut term = c64(1.0, 0.0);
                for qq in 1..=2 * ell {
                    term *= ctx.theta1(u + ((2 * ell + 1 + s - 2 * j - 2 * qq) as f64) * eta);
                }
                term /= q(u + ((s - 2 * j - 1) as f64) * eta)?
                    * q(u + ((s - 2 * j + 1) as f64) * eta)?;
                tot += term;
            }
            let lhs = pref * tot;
            let rhs = t_poly(ctx, s, u)?.poly.eval(sol.point.e);
            let r = (lhs - rhs).norm() / (1.0 + lhs.norm() + rhs.norm());
            if !r.is_finite() {
                return Err(Error::Pole { arg: u, dist: 0.0 });
            }
            Ok(r)
        })();
        match attempt {
            Ok(r) => {
                worst = worst.max(r);
                accepted += 1;
            }
            Err(Error::Pole { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

/// Residuals of the three curve involutions at the fibre over ζ: the lattice
/// shift (ζ+τ, K e^{4πiη}, E), the reflection (ζ, −K, −E), and the
/// hyperelliptic involution (4Nη−ζ, K⁻¹, E).  Each value is the worst
/// curve-relation residual of the transformed points.
pub fn involution_residuals(ctx: &EllipticContext, zeta: C) -> Result<(f64, f64, f64)> {
    let sols = fibre_over_zeta(ctx, zeta)?;
    let phase = (c64(0.0, 4.0 * std::f64::consts::PI) * ctx.eta).exp();
    let base = 4.0 * (ctx.big_n as f64) * ctx.eta;
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for sol in &sols {
        let p = &sol.point;
        let lattice = BlochPoint { zeta: p.zeta + ctx.tau, k: p.k * phase, e: p.e };
        let (a, b) = curve_residuals(ctx, &lattice)?;
        worst.0 = worst.0.max(a).max(b);
        let reflect = BlochPoint { zeta: p.zeta, k: -p.k, e: -p.e };
        let (a, b) = curve_residuals(ctx, &reflect)?;
        worst.1 = worst.1.max(a).max(b);
        let hyper = BlochPoint { zeta: base - p.zeta, k: 1.0 / p.k, e: p.e };
        let (a, b) = curve_residuals(ctx, &hyper)?;
        worst.2 = worst.2.max(a).max(b);
    }
    Ok(worst)
}

/// Pairwise agreement of the three routes to the A_{(ℓ+1)η} eigenvalue z:
/// the Ψ-ratio, the eigenvalue of the dual monodromy 𝓐 nearest to it, and
/// the quadratic z² − (T_top(E)/[2ℓ]!) z + D(E) = 0 root nearest to it.
pub fn z_triangle_residual(ctx: &EllipticContext, sol: &BlochSolution) -> Result<f64> {
    let ell = ctx.ell as i64;
    let z_q = sol.a_top_eigenvalue(ctx)?;
    let dual = dual_build(ctx)?;
    let a = dual.curly_a(c64(0.171, 0.093), sol.point.e)?;
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let z_dual = [(tr + disc) / 2.0, (tr - disc) / 2.0]
        .into_iter()
        .min_by(|p, q| {
            (p - z_q).norm().partial_cmp(&(q - z_q).norm()).expect("finite")
        })
        .expect("two roots");
    let hyper = hyperelliptic(ctx)?;
    let t = hyper.t_top.eval(sol.point.e) / ctx.efac(2 * ell)?;
    let d = hyper.d.eval(sol.point.e);
    let disc = (t * t - 4.0 * d).sqrt();
    let z_h1 = [(t + disc) / 2.0, (t - disc) / 2.0]
        .into_iter()
        .min_by(|p, q| {
            (p - z_q).norm().partial_cmp(&(q - z_q).norm()).expect("finite")
        })
        .expect("two roots");
    let scale = 1.0 + z_q.norm();
    Ok(((z_q - z_dual).norm().max((z_q - z_h1).norm()).max((z_dual - z_h1).norm())) / scale)
}

/// Residual of the characteristic constraint α z + F(E) + G(E)/z = 0 at an
/// on-curve point, normalized by the addend magnitudes.
pub fn on_curve_char_residual(ctx: &EllipticContext, sol: &BlochSolution, x: C) -> Result<f64> {
    let dec = char_decompose(ctx, x)?;
    let z = sol.a_top_eigenvalue(ctx)?;
    let t1 = dec.alpha * z;
    let t2 = dec.f.eval(sol.point.e);
    let t3 = dec.g.eval(sol.point.e) / z;
    let scale = (t1.norm() + t2.norm() + t3.norm()).max(1e-300);
    Ok((t1 + t2 + t3).norm() / scale)
}

/// Residuals of the closed forms for the A_{(ℓ∓2)η} eigenvalues against the
/// operator route on a Bloch eigenfunction (requires ℓ ≥ 2 for ε).
pub fn epsilon_xi_residuals(ctx: &EllipticContext, sol: &BlochSolution) -> Result<(f64, f64)> {
    let ell = ctx.ell as i64;
    let eta = ctx.eta;
    let z = sol.a_top_eigenvalue(ctx)?;
    let (eps, xi) = epsilon_xi(ctx, sol.point.e, z)?;
    let x0 = c64(0.21, 0.09);
    let p0 = (sol.psi_big)(x0)?;
    let eps_op = build_a(ctx, ((ell - 2) as f64) * eta)?.apply(&*sol.psi_big, x0)? / p0;
    let xi_op = build_a(ctx, ((ell + 2) as f64) * eta)?.apply(&*sol.psi_big, x0)? / p0;
    Ok((
        (eps_op - eps).norm() / eps.norm().max(1e-300),
        (xi_op - xi).norm() / xi.norm().max(1e-300),
    ))
}

// ---------------------------------------------------------------------------
// Suites.
// ---------------------------------------------------------------------------

fn suite_algebra(ctx: &EllipticContext, seed: u64) -> Result<Vec<CheckRow>> {
    let ell = ctx.ell as i64;
    let eta = ctx.eta;
    let lam = c64(0.31, 0.21);
    let mu = c64(-0.17, 0.09);
    let mut rows = Vec::new();
    rows.push(CheckRow::new(
        "skl6",
        skl6_worst(ctx, 2 * ell, 2, 4, seed ^ 0x51)?,
        1e-9,
    ));
    rows.push(CheckRow::new(
        "bax1",
        bax1_residual(ctx, lam, 2, 4, seed ^ 0xB1)?,
        1e-9,
    ));
    let l_op = build_sklyanin(ctx, 0, 2 * ell)?;
    let a_lam = build_a(ctx, lam)?;
    let a_mu = build_a(ctx, mu)?;
    let mut fam = TestFunctionFamily::new(seed ^ 0xC0);
    rows.push(CheckRow::new(
        "commute_l_a",
        op_residual(&l_op.compose(&a_lam), &a_lam.compose(&l_op), &mut fam, 2, 4)?,
        1e-9,
    ));
    let mut fam = TestFunctionFamily::new(seed ^ 0xC1);
    rows.push(CheckRow::new(
        "commute_a_a",
        op_residual(&a_lam.compose(&a_mu), &a_mu.compose(&a_lam), &mut fam, 2, 4)?,
        1e-9,
    ));
    let mut worst = 0.0_f64;
    for m in 1..=ell {
        let mut fam = TestFunctionFamily::new(seed ^ (0xD0 + m as u64));
        worst = worst.max(op_residual(
            &build_a(ctx, (m as f64) * eta)?,
            &build_a(ctx, -(m as f64) * eta)?,
            &mut fam,
            2,
            4,
        )?);
    }
    rows.push(CheckRow::new("a_lattice_parity", worst, 1e-9));
    let merge = shift_merge_abs(ctx);
    let mut fam = TestFunctionFamily::new(seed ^ 0xD8);
    rows.push(CheckRow::new(
        "a_identity",
        op_residual(
            &build_a(ctx, (ell as f64) * eta)?,
            &DifferenceOperator::identity(merge),
            &mut fam,
            2,
            4,
        )?,
        1e-9,
    ));
    let mut fam = TestFunctionFamily::new(seed ^ 0xD9);
    rows.push(CheckRow::new(
        "a_top_is_s0",
        op_residual(
            &build_a(ctx, ((ell - 1) as f64) * eta)?,
            &l_op.scale(ctx.en(ell) / ctx.en(2 * ell)),
            &mut fam,
            2,
            4,
        )?,
        1e-9,
    ));
    rows.push(CheckRow::new(
        "wr",
        wr_residual(ctx, lam, 2, 4, seed ^ 0xE0)?,
        1e-9,
    ));
    rows.push(CheckRow::new(
        "symm",
        symm_residual(ctx, lam, 4, seed ^ 0xE1)?,
        1e-9,
    ));
    let mut fam = TestFunctionFamily::new(seed ^ 0xE2);
    rows.push(CheckRow::new(
        "parity_conjugation",
        op_residual(
            &a_lam.parity_conjugate(),
            &build_a(ctx, -lam)?,
            &mut fam,
            2,
            4,
        )?,
        1e-9,
    ));
    rows.push(CheckRow::new(
        "s3",
        s3_worst(ctx, 2 * ell, 2, 4, seed ^ 0xE3)?,
        1e-9,
    ));
    let basis = theta_basis(ctx, seed ^ 0xF0)?;
    let w_op = build_intertwiner(ctx, 2 * ell)?;
    rows.push(CheckRow::new(
        "intertwiner_annihilation",
        annihilation_worst(&w_op, &basis, 5, seed ^ 0xF1)?,
        1e-8,
    ));
    let refl = a_lam.sub(&build_a(ctx, -lam)?);
    rows.push(CheckRow::new(
        "cor51_annihilation",
        annihilation_worst(&refl, &basis, 5, seed ^ 0xF2)?,
        1e-8,
    ));
    rows.push(CheckRow::new(
        "prop51_membership",
        prop51_membership(ctx, c64(0.27, 0.15), seed ^ 0xF3)?,
        1e-8,
    ));
    Ok(rows)
}

fn suite_transfer(ctx: &EllipticContext, seed: u64) -> Result<Vec<CheckRow>> {
    let ell = ctx.ell as i64;
    let mut rows = Vec::new();
    let mut worst = 0.0_f64;
    for j in 0..=ell {
        worst = worst.max(a_poly_route_residual(ctx, j)?);
    }
    rows.push(CheckRow::new("a_poly_dual_route", worst, 1e-10));
    let mut worst = 0.0_f64;
    for s in 0..=2 * ell {
        worst = worst.max(at_identification(ctx, s)?);
    }
    rows.push(CheckRow::new("at_identification", worst, 1e-9));
    let v = c64(0.27, 0.15);
    let mut worst = 0.0_f64;
    for sigma in 1..=2 * ell + 1 {
        worst = worst.max(fusion_check(ctx, sigma, v, seed ^ (sigma as u64))?);
    }
    rows.push(CheckRow::new("fusion", worst, 1e-9));
    let u = c64(0.21, 0.13);
    let mut parity = 0.0_f64;
    for s in 1..=2 * ell {
        let p0 = t_poly(ctx, s, u)?.poly;
        parity = parity.max(p0.parity_residual((s % 2) as usize));
    }
    rows.push(CheckRow::new("t_parity", parity, 1e-8));
    let sols = fibre_over_zeta(ctx, c64(0.33, 0.19))?;
    let sol = &sols[0];
    let q1 = sol.q_value(ctx, 2.0 * (ctx.ell as f64) * ctx.eta)?;
    rows.push(CheckRow::new(
        "q_normalization",
        (q1 - c64(1.0, 0.0)).norm(),
        1e-12,
    ));
    let (taa_val, taa_op) = taa_residuals(ctx, sol)?;
    rows.push(CheckRow::new("taa_value_route", taa_val, 1e-8));
    rows.push(CheckRow::new("taa_operator_route", taa_op, 1e-8));
    rows.push(CheckRow::new("baxter", baxter_residual(ctx, sol)?, 1e-8));
    let mut worst = 0.0_f64;
    for s in 1..=2 * ell {
        worst = worst.max(zero_zero_residual(ctx, sol, s, 5, seed ^ (0x99 + s as u64))?);
    }
    rows.push(CheckRow::new("q_sum_formula", worst, 1e-7));
    Ok(rows)
}

fn suite_curve(ctx: &EllipticContext, seed: u64) -> Result<Vec<CheckRow>> {
    let ell = ctx.ell as i64;
    let n_big = ctx.big_n as usize;
    let mut rows = Vec::new();
    let coeffs = curve_coeffs(ctx)?;
    let cmax = coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut palin = 0.0_f64;
    for j in 0..=n_big {
        palin = palin.max((coeffs[j] - coeffs[n_big - j]).norm() / cmax);
    }
    rows.push(CheckRow::new("coeff_palindrome", palin, 1e-10));
    let zeta = c64(0.33, 0.19);
    let sols = fibre_over_zeta(ctx, zeta)?;
    rows.push(CheckRow::new(
        "fibre_size",
        (sols.len() as f64 - 2.0 * n_big as f64).abs(),
        0.0,
    ));
    let mut r_curve = 0.0_f64;
    let mut r_minor = 0.0_f64;
    let mut r_eigen = 0.0_f64;
    let mut r_glue = 0.0_f64;
    let mut r_mult = 0.0_f64;
    let mut r_cover = 0.0_f64;
    let mut r_full = 0.0_f64;
    for sol in &sols {
        let (a, b) = curve_residuals(ctx, &sol.point)?;
        r_curve = r_curve.max(a).max(b);
        let (m0, m1) = minor_residuals(ctx, &sol.point)?;
        r_minor = r_minor.max(m0).max(m1);
        r_eigen = r_eigen.max(sol.eigen_residual);
        r_glue = r_glue.max(sol.glue_residual);
        let (b1, bt) = multiplier_residuals(ctx, sol, c64(0.23, 0.07))?;
        r_mult = r_mult.max(b1).max(bt);
        let (v, scale) = curve_eval(ctx, &coeffs, sol.point.zeta, sol.point.k);
        r_cover = r_cover.max(v.norm() / scale);
        r_full = r_full.max(full_system_residual(ctx, sol)?);
    }
    rows.push(CheckRow::new("curve_relations", r_curve, 1e-7));
    rows.push(CheckRow::new("bloch_minors", r_minor, 1e-7));
    rows.push(CheckRow::new("eigen_equation", r_eigen, 1e-7));
    rows.push(CheckRow::new("glueing", r_glue, 1e-7));
    rows.push(CheckRow::new("bloch_multipliers", r_mult, 1e-7));
    rows.push(CheckRow::new("covering_form", r_cover, 1e-7));
    rows.push(CheckRow::new("bloch_full_system", r_full, 1e-7));
    let (lat, refl, hyp) = involution_residuals(ctx, zeta)?;
    rows.push(CheckRow::new("involution_lattice", lat, 1e-7));
    rows.push(CheckRow::new("involution_reflection", refl, 1e-7));
    rows.push(CheckRow::new("involution_hyperelliptic", hyp, 1e-7));
    let eb = band_edges_bloch(ctx)?;
    let eh = band_edges_hyper(ctx)?;
    rows.push(CheckRow::new(
        "edges_count",
        (eb.len() as f64 - 2.0 * (2.0 * ell as f64 + 1.0)).abs(),
        0.0,
    ));
    let edge_match = multiset_match(&eb, &eh).unwrap_or(f64::INFINITY);
    rows.push(CheckRow::new("edges_cross_route", edge_match, 1e-6));
    let neg: Vec<C> = eb.iter().map(|e| -e).collect();
    rows.push(CheckRow::new(
        "edges_negation_symmetry",
        multiset_match(&eb, &neg).unwrap_or(f64::INFINITY),
        0.0,
    ));
    let hyper = hyperelliptic(ctx)?;
    rows.push(CheckRow::new("t_top_parity", hyper.t_top.parity_residual(1), 1e-10));
    rows.push(CheckRow::new("d_parity", hyper.d.parity_residual(0), 1e-12));
    rows.push(CheckRow::new(
        "p_degree",
        hyper
            .p
            .degree()
            .map_or(f64::INFINITY, |d| (d as f64 - (2 * ell + 1) as f64).abs()),
        0.0,
    ));
    let ys = crate::polyalg::poly_roots(&hyper.p, ctx.tol.root_tol)?;
    let mut min_sep = f64::INFINITY;
    for (i, a) in ys.iter().enumerate() {
        for b in ys.iter().take(i) {
            min_sep = min_sep.min((a - b).norm());
        }
    }
    rows.push(CheckRow::new(
        "p_root_separation_deficit",
        (1e-6 - min_sep).max(0.0),
        0.0,
    ));
    let sol = &sols[0];
    let z = sol.a_top_eigenvalue(ctx)?;
    let f2 = ctx.efac(2 * ell)?;
    let lhs = z + hyper.d.eval(sol.point.e) / z;
    let rhs = hyper.t_top.eval(sol.point.e) / f2;
    rows.push(CheckRow::new(
        "h1_trace",
        (lhs - rhs).norm() / (1.0 + lhs.norm() + rhs.norm()),
        1e-8,
    ));
    let w = crate::curve::w_value(ctx, &sol.point, z)?;
    let binom = ctx.ebin(2 * ell, ell)?;
    let wr = (w * w - hyper.p.eval(sol.point.e * sol.point.e) / (binom * binom)).norm()
        / (1.0 + (w * w).norm());
    rows.push(CheckRow::new("w_square", wr, 1e-8));
    if ell >= 2 {
        let (eps, xi) = epsilon_xi_residuals(ctx, sol)?;
        rows.push(CheckRow::new("epsilon_closed_form", eps, 1e-8));
        rows.push(CheckRow::new("xi_closed_form", xi, 1e-8));
    }
    let asym = asymptotics_check(ctx)?;
    let deficit = |s: f64| ((5.0 - s) / 5.0).max((s - 20.0) / 20.0).max(0.0);
    rows.push(CheckRow::new("asym_shrink_plus", deficit(asym.shrink.0), 0.0));
    rows.push(CheckRow::new("asym_shrink_minus", deficit(asym.shrink.1), 0.0));
    rows.push(CheckRow::new("asym_k2_law_coarse", asym.k2_law.0, 5e-2));
    rows.push(CheckRow::new("asym_k2_law_fine", asym.k2_law.1, 5e-3));
    let _ = seed;
    Ok(rows)
}

fn suite_lax(ctx: &EllipticContext, seed: u64) -> Result<Vec<CheckRow>> {
    let ell = ctx.ell as i64;
    let mut rows = Vec::new();
    rows.push(CheckRow::new(
        "lax_relation",
        lax_residual(ctx, c64(0.77, -0.31), 5, seed ^ 0x1A)?,
        1e-9,
    ));
    let x1 = c64(0.171, 0.093);
    let x2 = c64(-0.31, 0.22);
    let d1 = char_decompose(ctx, x1)?;
    let d2 = char_decompose(ctx, x2)?;
    let sign = if ctx.ell % 2 == 0 { 1.0 } else { -1.0 };
    let alpha_pred = sign * ctx.ebin(2 * ell, ell)?;
    rows.push(CheckRow::new(
        "char_alpha",
        (d1.alpha - alpha_pred).norm() / (1.0 + alpha_pred.norm()),
        1e-9,
    ));
    let f_pred = t_top_zero(ctx)?.scale(-sign / (ctx.efac(ell)? * ctx.efac(ell)?));
    rows.push(CheckRow::new("char_f_identification", d1.f.rel_diff(&f_pred), 1e-8));
    let g_pred = crate::curve::d_poly(ctx)?.scale(sign * ctx.ebin(2 * ell, ell)?);
    rows.push(CheckRow::new("char_g_identification", d1.g.rel_diff(&g_pred), 1e-8));
    let xinv = (d1.alpha - d2.alpha).norm() / (1.0 + d1.alpha.norm());
    let xinv = xinv.max(d1.f.rel_diff(&d2.f)).max(d1.g.rel_diff(&d2.g));
    rows.push(CheckRow::new("char_x_invariance", xinv, 1e-9));
    let dual = dual_build(ctx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD13);
    let mut worst = 0.0_f64;
    let mut accepted = 0usize;
    let mut draws = 0usize;
    while accepted < 3 {
        draws += 1;
        if draws > 12 {
            return Err(Error::NumericalLimit(
                "dual relation check exhausted its pole-retry budget".into(),
            ));
        }
        let x = c64(rng.random_range(-0.45..0.45), rng.random_range(0.02..0.22));
        let e = c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let attempt = (|| -> Result<f64> {
            let cl = dual.curly_l(x, e)?;
            let lhs = dual.curly_a(x + ctx.eta, e)? * &cl;
            let rhs = &cl * dual.curly_a(x, e)?;
            Ok(max_entry(&(&lhs - &rhs)) / max_entry(&rhs).max(1e-300))
        })();
        match attempt {
            Ok(r) => {
                worst = worst.max(r);
                accepted += 1;
            }
            Err(Error::Pole { .. }) | Err(Error::Conditioning(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    rows.push(CheckRow::new("dual_relation", worst, 1e-9));
    let sols = fibre_over_zeta(ctx, c64(0.29, 0.13))?;
    let sol = &sols[0];
    let x0 = c64(0.171, 0.093);
    let z = sol.a_top_eigenvalue(ctx)?;
    let a = dual.curly_a(x0, sol.point.e)?;
    let v = DMatrix::from_fn(2, 1, |j, _| {
        (sol.psi_big)(x0 + (j as f64) * ctx.eta).expect("generic point")
    });
    let av = &a * &v;
    let zv = v.map(|t| z * t);
    rows.push(CheckRow::new(
        "dual_eigenvector",
        max_entry(&(&av - &zv)) / max_entry(&zv).max(1e-300),
        1e-8,
    ));
    let hyper = hyperelliptic(ctx)?;
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let tr_pred = hyper.t_top.eval(sol.point.e) / ctx.efac(2 * ell)?;
    let det_pred = hyper.d.eval(sol.point.e);
    rows.push(CheckRow::new(
        "dual_trace",
        (tr - tr_pred).norm() / (1.0 + tr_pred.norm()),
        1e-8,
    ));
    rows.push(CheckRow::new(
        "dual_determinant",
        (det - det_pred).norm() / (1.0 + det_pred.norm()),
        1e-8,
    ));
    rows.push(CheckRow::new(
        "z_triangle",
        z_triangle_residual(ctx, sol)?,
        1e-7,
    ));
    rows.push(CheckRow::new(
        "on_curve_characteristic",
        on_curve_char_residual(ctx, sol, x0)?,
        1e-7,
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xCA);
    for (n, thresh) in [(3usize, 1e-9), (5usize, 1e-8)] {
        let mut resid = None;
        for _ in 0..4 {
            let xs: Vec<C> = (0..n)
                .map(|_| c64(rng.random_range(0.05..0.45), rng.random_range(0.01..0.2)))
                .collect();
            match cauchy_residual(ctx, &xs, c64(0.41, 0.19)) {
                Ok(r) => {
                    resid = Some(r);
                    break;
                }
                Err(Error::Pole { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let r = resid.ok_or_else(|| {
            Error::NumericalLimit("Cauchy identity sampling exhausted its retry budget".into())
        })?;
        rows.push(CheckRow::new(format!("cauchy_n{n}"), r, thresh));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(ell: u32) -> EllipticContext {
        EllipticContext::default_params(ell).unwrap()
    }

    #[test]
    fn check_row_semantics() {
        assert!(CheckRow::new("a", 1e-10, 1e-9).pass);
        assert!(!CheckRow::new("b", 2e-9, 1e-9).pass);
        assert!(!CheckRow::new("c", f64::NAN, 1e-9).pass);
        assert!(!CheckRow::new("d", f64::INFINITY, 1e-9).pass);
        assert!(CheckRow::new("e", 0.0, 0.0).pass);
    }

    #[test]
    fn algebra_suite_passes_for_smallest_spin() {
        let rows = run_suite(&ctx(1), Suite::Algebra, 42).unwrap();
        assert!(rows.len() >= 14);
        for r in &rows {
            assert!(r.pass, "{}: {:.3e} vs {:.1e}", r.name, r.residual, r.threshold);
        }
    }

    #[test]
    fn transfer_suite_passes_for_smallest_spin() {
        let rows = run_suite(&ctx(1), Suite::Transfer, 42).unwrap();
        for r in &rows {
            assert!(r.pass, "{}: {:.3e} vs {:.1e}", r.name, r.residual, r.threshold);
        }
    }

    #[test]
    fn curve_suite_passes_for_smallest_spin() {
        let rows = run_suite(&ctx(1), Suite::Curve, 42).unwrap();
        assert!(rows.iter().any(|r| r.name == "fibre_size"));
        for r in &rows {
            assert!(r.pass, "{}: {:.3e} vs {:.1e}", r.name, r.residual, r.threshold);
        }
    }

    #[test]
    fn lax_suite_passes_for_smallest_spin() {
        let rows = run_suite(&ctx(1), Suite::Lax, 42).unwrap();
        for r in &rows {
            assert!(r.pass, "{}: {:.3e} vs {:.1e}", r.name, r.residual, r.threshold);
        }
    }

    #[test]
    fn suite_names_are_stable() {
        let names: Vec<&str> = Suite::all().iter().map(|s| s.name()).collect();
        assert_eq!(names, ["algebra", "transfer", "curve", "lax"]);
    }
}
