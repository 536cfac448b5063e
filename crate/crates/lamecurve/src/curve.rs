//! The spectral curve of the difference Lamé operator in both presentations:
//! the covering form Σ_j (−1)^j C_j θ₁(ζ−4jη) K^{2(N−j)} = 0 over the ζ-torus
//! and the hyperelliptic form w² = binom(2ℓ,ℓ)⁻² P_{2ℓ+1}(E²), together with
//! the Bloch eigenfunctions living on it, band edges computed two independent
//! ways, and the asymptotic laws at the two points above E = ∞.

use crate::diffop::FnC;
use crate::error::{Error, Result};
use crate::polyalg::{poly_roots, PolynomialC, TridiagBordered};
use crate::theta::{c64, C, EllipticContext};
use crate::transfer::{a_polys_all, q_value, t_top_zero};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A point (ζ, K, E) of the spectral curve.
#[derive(Debug, Clone, Copy)]
pub struct BlochPoint {
    /// Base coordinate on the ζ-torus.
    pub zeta: C,
    /// Bloch parameter K.
    pub k: C,
    /// Eigenvalue E.
    pub e: C,
}

/// A Bloch eigenfunction over a curve point: the coefficient vector of the
/// theta expansion, the entire function Ψ, the eigenfunction ψ, and the
/// residuals recorded during construction.
#[derive(Clone)]
pub struct BlochSolution {
    /// The curve point carrying ζ, K, E.
    pub point: BlochPoint,
    /// Expansion coefficients s_1..s_ℓ (null direction of the linear system).
    pub s: Vec<C>,
    /// The entire function Ψ(x) = K^{x/η} Σ_m s_m θ₁(ζ+2x−2mη)/θ₁(ζ) Π_{j≠m} θ₁(2x−2jη).
    pub psi_big: FnC,
    /// The eigenfunction ψ(x) = Ψ(x) / Π_{j=1}^{ℓ} θ₁(2x−2jη).
    pub psi: FnC,
    /// Worst normalized residual of the eigenvalue equation at the seeded
    /// sample points.
    pub eigen_residual: f64,
    /// Worst normalized glueing mismatch Ψ(jη) − Ψ(−jη), j = 1..ℓ.
    pub glue_residual: f64,
}

impl std::fmt::Debug for BlochSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlochSolution")
            .field("point", &self.point)
            .field("s", &self.s)
            .field("eigen_residual", &self.eigen_residual)
            .field("glue_residual", &self.glue_residual)
            .finish()
    }
}

impl BlochSolution {
    /// Q-function value Q(u) = Ψ(u/2)/Ψ(ℓη) of this eigenfunction.
    pub fn q_value(&self, ctx: &EllipticContext, u: C) -> Result<C> {
        q_value(&self.psi_big, ctx, u)
    }

    /// The eigenvalue z of the end-of-family operator A_{(ℓ+1)η} on this
    /// eigenfunction, z = Ψ((ℓ+1)η)/Ψ(ℓη) = Q(2(ℓ+1)η).
    pub fn a_top_eigenvalue(&self, ctx: &EllipticContext) -> Result<C> {
        self.q_value(ctx, 2.0 * ((ctx.ell + 1) as f64) * ctx.eta)
    }
}

/// Hyperelliptic data: the top transfer polynomial, the determinant
/// polynomial D_{2ℓ}(E), and the even reduction P(y), y = E².
#[derive(Debug, Clone)]
pub struct HyperData {
    /// T_{2ℓ+1}(0, E), odd of degree 2ℓ+1.
    pub t_top: PolynomialC,
    /// D_{2ℓ}(E), even of degree 2ℓ.
    pub d: PolynomialC,
    /// Monic P(y) of degree 2ℓ+1 with w² = binom(2ℓ,ℓ)⁻² P(E²).
    pub p: PolynomialC,
}

/// The assembled spectral curve: covering-form coefficients, hyperelliptic
/// data, and band edges computed by both routes.
#[derive(Debug, Clone)]
pub struct SpectralCurve {
    /// Coefficients C_0..C_N of the covering form.
    pub c: Vec<C>,
    /// Hyperelliptic polynomials.
    pub hyper: HyperData,
    /// Band edges from the four root/filter systems.
    pub edges_bloch: Vec<C>,
    /// Band edges as ± square roots of the P roots.
    pub edges_hyper: Vec<C>,
}

/// Coefficients C_j^{(ℓ)}, j = 0..N, N = ℓ(ℓ+1)/2, of the covering form:
/// a sum over subsets J ⊆ {1..ℓ} with element sum j,
///
/// ```text
/// C_j = Σ_{‖J‖=j} (−1)^{κ(J)+j} Π_{k∈J, k'∉J} [k+k']/[k−k'],
/// κ(J) = |J|ℓ + |J|(|J|−1)/2.
/// ```
pub fn curve_coeffs(ctx: &EllipticContext) -> Result<Vec<C>> {
    let ell = ctx.ell as usize;
    let n_big = ctx.big_n as usize;
    let mut coeffs = vec![c64(0.0, 0.0); n_big + 1];
    for mask in 0u32..(1u32 << ell) {
        let r = mask.count_ones() as i64;
        let mut j = 0usize;
        let mut prod = c64(1.0, 0.0);
        for b in 0..ell {
            if mask & (1 << b) == 0 {
                continue;
            }
            let k = (b + 1) as i64;
            j += k as usize;
            for bp in 0..ell {
                if mask & (1 << bp) != 0 {
                    continue;
                }
                let kp = (bp + 1) as i64;
                let den = ctx.en(k - kp);
                if den.norm() == 0.0 {
                    return Err(Error::Validation(format!(
                        "resonant elliptic number [{}] in curve coefficients",
                        k - kp
                    )));
                }
                prod *= ctx.en(k + kp) / den;
            }
        }
        let kappa = r * (ctx.ell as i64) + r * (r - 1) / 2;
        let sign = if (kappa + j as i64) % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[j] += sign * prod;
    }
    Ok(coeffs)
}

/// Evaluates the covering form Σ_j (−1)^j C_j θ₁(ζ−4jη) K^{2(N−j)} and
/// returns the value together with the largest addend magnitude (the scale
/// for normalized residuals).
pub fn curve_eval(ctx: &EllipticContext, c: &[C], zeta: C, k: C) -> (C, f64) {
    let n_big = c.len() - 1;
    let mut sum = c64(0.0, 0.0);
    let mut scale = 0.0_f64;
    for (j, &cj) in c.iter().enumerate() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign
            * cj
            * ctx.theta1(zeta - 4.0 * (j as f64) * ctx.eta)
            * k.powi(2 * (n_big - j) as i32);
        scale = scale.max(term.norm());
        sum += term;
    }
    (sum, scale.max(1e-300))
}

/// The ℓ×ℓ matrix K^{2m} δ_{mn} + G_{mn}(ζ) of the linear system for the
/// expansion coefficients s_n, with
///
/// ```text
/// G_{mn} = (−1)^{ℓ+1} [2m] ( Π_{j≠m} [m+j]/[m−j] ) Φ(−2(m+n)η, ζ).
/// ```
fn coefficient_matrix(ctx: &EllipticContext, zeta: C, k: C) -> Result<DMatrix<C>> {
    let ell = ctx.ell as usize;
    let mut m = DMatrix::from_element(ell, ell, c64(0.0, 0.0));
    let base_sign = if ctx.ell % 2 == 0 { -1.0 } else { 1.0 };
    for mi in 1..=ell {
        let mut pre = base_sign * ctx.en(2 * mi as i64);
        for j in 1..=ell {
            if j != mi {
                pre *= ctx.en((mi + j) as i64) / ctx.en(mi as i64 - j as i64);
            }
        }
        for n in 1..=ell {
            let phi = ctx.phi(-2.0 * ((mi + n) as f64) * ctx.eta, zeta)?;
            m[(mi - 1, n - 1)] = pre * phi;
        }
        m[(mi - 1, mi - 1)] += k.powi(2 * mi as i32);
    }
    Ok(m)
}

fn psi_terms(ctx: &EllipticContext, zeta: C, s: &[C], x: C) -> (C, f64) {
    let ell = ctx.ell as usize;
    let inv_tz = 1.0 / ctx.theta1(zeta);
    let mut tot = c64(0.0, 0.0);
    let mut scale = 0.0_f64;
    for m in 1..=ell {
        let mut term = s[m - 1] * ctx.theta1(zeta + 2.0 * x - 2.0 * (m as f64) * ctx.eta) * inv_tz;
        for j in 1..=ell {
            if j != m {
                term *= ctx.theta1(2.0 * x - 2.0 * (j as f64) * ctx.eta);
            }
        }
        scale += term.norm();
        tot += term;
    }
    (tot, scale)
}

/// All Bloch solutions over a generic base point ζ: the covering form is
/// solved as a degree-N polynomial in Y = K², each root is opened into the
/// two K signs, the null direction of the coefficient matrix is extracted,
/// Ψ is assembled, and E is recovered from the difference equation
/// ψ(x+η) + C(x)ψ(x−η) = Eψ(x) at generic sample points (three independent
/// samples must agree).  Every solution is verified
/// against the two curve relations, the covering form, the eigenvalue
/// equation at ten seeded points, and the glueing conditions before being
/// returned; the list is sorted by E.
pub fn fibre_over_zeta(ctx: &EllipticContext, zeta: C) -> Result<Vec<BlochSolution>> {
    ctx.guard_theta1_arg(zeta)?;
    let n_big = ctx.big_n as usize;
    let coeffs = curve_coeffs(ctx)?;
    // Covering form as a polynomial in Y = K².
    let mut py = vec![c64(0.0, 0.0); n_big + 1];
    for j in 0..=n_big {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        py[n_big - j] = sign * coeffs[j] * ctx.theta1(zeta - 4.0 * (j as f64) * ctx.eta);
    }
    let ys = poly_roots(&PolynomialC::new(py).trimmed(ctx.tol.trim_tol), ctx.tol.root_tol)?;
    let mut sols = Vec::with_capacity(2 * ys.len());
    for y in ys {
        let k_principal = y.sqrt();
        for k in [k_principal, -k_principal] {
            sols.push(solve_branch(ctx, zeta, k, &coeffs)?);
        }
    }
    sols.sort_by(|a, b| {
        (a.point.e.re, a.point.e.im)
            .partial_cmp(&(b.point.e.re, b.point.e.im))
            .expect("finite eigenvalues")
    });
    Ok(sols)
}

fn solve_branch(
    ctx: &EllipticContext,
    zeta: C,
    k: C,
    coeffs: &[C],
) -> Result<BlochSolution> {
    let ell = ctx.ell as usize;
    let m = coefficient_matrix(ctx, zeta, k)?;
    let entry_scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let pow_scale = (1..=ell)
        .map(|mi| k.norm().powi(2 * mi as i32))
        .fold(0.0, f64::max);
    let scale = entry_scale + pow_scale;
    let s: Vec<C> = if ell == 1 {
        if m[(0, 0)].norm() >= ctx.tol.null_tol * scale {
            return Err(Error::DegenerateFibre(format!(
                "coefficient matrix not singular at K = {k}: |M| = {:.3e} vs scale {scale:.3e}",
                m[(0, 0)].norm()
            )));
        }
        vec![c64(1.0, 0.0)]
    } else {
        // Equilibrate rows, then columns: the diagonal carries K^{2m}, so
        // near the infinite points (|K| large) the raw rows span many orders
        // of magnitude and the SVD null vector loses accuracy like
        // |K|^{2(ℓ-1)}·ε.  Diagonal scalings R·M·D preserve the null space:
        // if (R M D) ŝ = 0 then s = D ŝ.
        let mut eq = m.clone();
        for i in 0..ell {
            let rmax = (0..ell).map(|j| eq[(i, j)].norm()).fold(0.0, f64::max);
            let f = 1.0 / rmax.max(1e-300);
            for j in 0..ell {
                eq[(i, j)] *= f;
            }
        }
        let mut col_f = vec![1.0_f64; ell];
        for j in 0..ell {
            let cmax = (0..ell).map(|i| eq[(i, j)].norm()).fold(0.0, f64::max);
            col_f[j] = 1.0 / cmax.max(1e-300);
            for i in 0..ell {
                eq[(i, j)] *= col_f[j];
            }
        }
        let svd = eq.svd(true, true);
        let sv = &svd.singular_values;
        let (mut i_min, mut i_max) = (0usize, 0usize);
        for i in 0..sv.len() {
            if sv[i] < sv[i_min] {
                i_min = i;
            }
            if sv[i] > sv[i_max] {
                i_max = i;
            }
        }
        if sv[i_min] >= ctx.tol.null_tol * sv[i_max] {
            return Err(Error::DegenerateFibre(format!(
                "no null direction at K = {k}: sigma_min/sigma_max = {:.3e}",
                sv[i_min] / sv[i_max]
            )));
        }
        let v_t = svd.v_t.expect("requested V^H");
        // Rows of V^H are conjugated right singular vectors.
        let mut raw: Vec<C> = (0..ell).map(|n| col_f[n] * v_t[(i_min, n)].conj()).collect();
        // Near the infinite points the components of s are exponentially
        // graded and the glueing conditions isolate each one, so absolute
        // accuracy ~ε‖s‖ from the SVD is not enough.  When the lower rows
        // are strictly diagonally dominant (the K^{2m} regime) and the
        // leading component dominates, Gauss–Seidel sweeps pivoted on s₁
        // converge geometrically and restore componentwise relative
        // accuracy.
        let dominant = (1..ell).all(|i| {
            let off: f64 = (0..ell).filter(|&n| n != i).map(|n| m[(i, n)].norm()).sum();
            m[(i, i)].norm() >= 2.0 * off
        });
        let s_peak = raw.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if dominant && raw[0].norm() >= 0.99 * s_peak {
            let pivot = raw[0];
            for v in raw.iter_mut() {
                *v /= pivot;
            }
            for _ in 0..8 {
                let mut moved = 0.0_f64;
                for i in 1..ell {
                    let mut acc = c64(0.0, 0.0);
                    for n in 0..ell {
                        if n != i {
                            acc += m[(i, n)] * raw[n];
                        }
                    }
                    let next = -acc / m[(i, i)];
                    moved = moved.max((next - raw[i]).norm() / next.norm().max(1e-300));
                    raw[i] = next;
                }
                if moved < 1e-15 {
                    break;
                }
            }
        }
        raw
    };
    // Defense against a misread null direction: the matrix must actually
    // annihilate it relative to the addend scale.
    let ms = &m * DMatrix::from_column_slice(ell, 1, &s);
    let s_max = s.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst_ms = ms.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if worst_ms > 1e-6 * scale * s_max {
        return Err(Error::DegenerateFibre(format!(
            "null direction fails to annihilate the coefficient matrix: |Ms| = {worst_ms:.3e}"
        )));
    }

    let shared = Arc::new(ctx.clone());
    let log_k = k.ln();
    let s_arc = Arc::new(s.clone());
    let psi_big: FnC = {
        let cx = Arc::clone(&shared);
        let sv = Arc::clone(&s_arc);
        Arc::new(move |x| {
            let (tot, _) = psi_terms(&cx, zeta, &sv, x);
            Ok((log_k * (x / cx.eta)).exp() * tot)
        })
    };
    let psi: FnC = {
        let cx = Arc::clone(&shared);
        let big = Arc::clone(&psi_big);
        Arc::new(move |x| {
            let mut den = c64(1.0, 0.0);
            for j in 1..=cx.ell as i64 {
                den *= cx.inv_theta1(2.0 * x - 2.0 * (j as f64) * cx.eta)?;
            }
            Ok(big(x)? * den)
        })
    };

    // E from the difference equation ψ(x+η) + C(x)ψ(x−η) = Eψ(x) at generic
    // sample points.  A special-point ratio (e.g. at x = ℓη) can lose digits
    // to cancellation near degenerate fibres, so three independent samples
    // are required to agree instead.
    let eta = ctx.eta;
    let ell_f = ell as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(0xE16E);
    let mut e_samples: Vec<C> = Vec::with_capacity(3);
    let mut draws = 0usize;
    while e_samples.len() < 3 {
        draws += 1;
        if draws > 24 {
            return Err(Error::NumericalLimit(format!(
                "eigenvalue recovery exhausted its sampling budget over zeta = {zeta}"
            )));
        }
        let x = c64(rng.random_range(0.1..0.6), rng.random_range(0.02..0.2));
        let attempt = (|| -> Result<C> {
            let (den, den_scale) = psi_terms(ctx, zeta, &s, x);
            if den.norm() < 1e-6 * den_scale.max(1e-300) {
                return Err(Error::Pole { arg: x, dist: 0.0 });
            }
            let cx = ctx.theta1(2.0 * x + 2.0 * ell_f * eta)
                * ctx.theta1(2.0 * x - 2.0 * (ell_f + 1.0) * eta)
                * ctx.inv_theta1(2.0 * x)?
                * ctx.inv_theta1(2.0 * x - 2.0 * eta)?;
            // ψ ratios through psi (the downstairs function) at x±η over x.
            let val = (psi(x + eta)? + cx * psi(x - eta)?) / psi(x)?;
            if !val.re.is_finite() || !val.im.is_finite() {
                return Err(Error::Pole { arg: x, dist: 0.0 });
            }
            Ok(val)
        })();
        match attempt {
            Ok(v) => e_samples.push(v),
            Err(Error::Pole { .. }) => continue,
            Err(err) => return Err(err),
        }
    }
    let e = e_samples[0];
    for v in &e_samples[1..] {
        if (v - e).norm() > 1e-9 * (1.0 + e.norm()) {
            return Err(Error::DegenerateFibre(format!(
                "eigenvalue extraction is inconsistent across sample points: {e} vs {v}"
            )));
        }
    }
    let point = BlochPoint { zeta, k, e };

    // Mandatory verification layer.
    let (r1, r2) = curve_residuals(ctx, &point)?;
    if r1 > ctx.tol.point_tol || r2 > ctx.tol.point_tol {
        return Err(Error::Consistency(format!(
            "curve relations fail on a constructed point: residuals ({r1:.3e}, {r2:.3e})"
        )));
    }
    let (cv, cs) = curve_eval(ctx, coeffs, zeta, k);
    if cv.norm() / cs > ctx.tol.point_tol {
        return Err(Error::Consistency(format!(
            "covering form fails on a constructed point: residual {:.3e}",
            cv.norm() / cs
        )));
    }
    let eigen_residual = eigen_equation_residual(ctx, &psi, e, 10, 0xD82C)?;
    if eigen_residual > 1e-8 {
        return Err(Error::Consistency(format!(
            "eigenvalue equation fails on a constructed solution: residual {eigen_residual:.3e}"
        )));
    }
    // Glueing residual Ψ(jη) − Ψ(−jη), normalized by the term mass of each
    // evaluation (the backward-error scale): the two sides carry K^{±j}
    // factors, so near the infinite points (|K| large) the values themselves
    // cancel far below their term mass and a value-relative residual would
    // only measure that cancellation, not solution quality.
    let mut glue_residual = 0.0_f64;
    let mut glue_worst_j = 0i64;
    for j in 1..=ell as i64 {
        let (p_plus, m_plus) = psi_terms(ctx, zeta, &s, (j as f64) * eta);
        let (p_minus, m_minus) = psi_terms(ctx, zeta, &s, -(j as f64) * eta);
        let wp = (log_k * c64(j as f64, 0.0)).exp();
        let wm = (log_k * c64(-(j as f64), 0.0)).exp();
        let num = (wp * p_plus - wm * p_minus).norm();
        let den = wp.norm() * m_plus + wm.norm() * m_minus;
        let r = num / den.max(1e-300);
        if r > glue_residual {
            glue_residual = r;
            glue_worst_j = j;
        }
    }
    if glue_residual > 1e-8 {
        return Err(Error::Consistency(format!(
            "glueing conditions fail on a constructed solution: residual {glue_residual:.3e} \
             at j = {glue_worst_j} over zeta = {zeta} with K = {k}"
        )));
    }

    Ok(BlochSolution {
        point,
        s,
        psi_big,
        psi,
        eigen_residual,
        glue_residual,
    })
}

/// Worst normalized residual of the eigenvalue equation
///
/// ```text
/// ψ(x+η) + [θ₁(2x+2ℓη) θ₁(2x−2(ℓ+1)η) / (θ₁(2x) θ₁(2x−2η))] ψ(x−η) = E ψ(x)
/// ```
///
/// at `n_points` seeded sample points (pole hits are redrawn).
pub fn eigen_equation_residual(
    ctx: &EllipticContext,
    psi: &FnC,
    e: C,
    n_points: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ell_f = ctx.ell as f64;
    let eta = ctx.eta;
    let mut worst = 0.0_f64;
    let mut accepted = 0usize;
    let mut draws = 0usize;
    while accepted < n_points {
        draws += 1;
        if draws > 4 * n_points {
            return Err(Error::NumericalLimit(
                "eigenvalue-equation check exhausted its pole-retry budget".into(),
            ));
        }
        let x = c64(rng.random_range(0.1..0.6), rng.random_range(0.02..0.2));
        let attempt = (|| -> Result<f64> {
            let cx = ctx.theta1(2.0 * x + 2.0 * ell_f * eta)
                * ctx.theta1(2.0 * x - 2.0 * (ell_f + 1.0) * eta)
                * ctx.inv_theta1(2.0 * x)?
                * ctx.inv_theta1(2.0 * x - 2.0 * eta)?;
            let lhs = psi(x + eta)? + cx * psi(x - eta)?;
            let rhs = e * psi(x)?;
            Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-30))
        })();
        match attempt {
            Ok(r) => {
                if !r.is_finite() {
                    return Err(Error::NumericalLimit(
                        "eigenvalue-equation residual is not finite".into(),
                    ));
                }
                worst = worst.max(r);
                accepted += 1;
            }
            Err(Error::Pole { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

/// Normalized residuals of the two scalar curve relations at a point
/// (ζ, K, E):
///
/// ```text
/// r1:  Σ_{j=0}^{ℓ}   (−1)^j K^{−j} θ₁(ζ−2jη) [ℓ;j] A_{jη}(E)            = 0,
/// r2:  Σ_{j=0,j≠1}^{ℓ+1} (−1)^j K^{−j} θ₁(ζ−2jη) θ₁(2(j−1)η) [ℓ+1;j] A_{|j−1|η}(E) = 0,
/// ```
///
/// each normalized by its largest addend magnitude.
pub fn curve_residuals(ctx: &EllipticContext, p: &BlochPoint) -> Result<(f64, f64)> {
    let ell = ctx.ell as i64;
    let ladder = a_polys_all(ctx, ell)?;
    let a_at = |j: i64, e: C| ladder[(ell - j) as usize].eval(e);
    let eta = ctx.eta;
    let mut sum1 = c64(0.0, 0.0);
    let mut max1 = 0.0_f64;
    for j in 0..=ell {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign
            * p.k.powi(-(j as i32))
            * ctx.theta1(p.zeta - 2.0 * (j as f64) * eta)
            * ctx.ebin(ell, j)?
            * a_at(j, p.e);
        max1 = max1.max(term.norm());
        sum1 += term;
    }
    let mut sum2 = c64(0.0, 0.0);
    let mut max2 = 0.0_f64;
    for j in 0..=(ell + 1) {
        if j == 1 {
            continue;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign
            * p.k.powi(-(j as i32))
            * ctx.theta1(p.zeta - 2.0 * (j as f64) * eta)
            * ctx.en(j - 1)
            * ctx.ebin(ell + 1, j)?
            * a_at((j - 1).abs(), p.e);
        max2 = max2.max(term.norm());
        sum2 += term;
    }
    let r1 = sum1.norm() / max1.max(1e-300);
    let r2 = sum2.norm() / max2.max(1e-300);
    if !r1.is_finite() || !r2.is_finite() {
        return Err(Error::NumericalLimit(
            "curve-relation residuals are not finite".into(),
        ));
    }
    Ok((r1, r2))
}

/// The (ℓ+1)×ℓ matrix of the Bloch linear system at fixed (ζ, K), split into
/// the E-independent part and the addend-magnitude bookkeeping needed for
/// normalized minors.  Rows are indexed i = 0..ℓ, columns j = 1..ℓ; `eval`
/// adds the −E diagonal of rows 1..ℓ.
#[derive(Debug, Clone)]
pub struct BlochMatrix {
    base: DMatrix<C>,
    base_scale: DMatrix<f64>,
    ell: usize,
}

impl BlochMatrix {
    /// The matrix at eigenvalue `e`.
    pub fn eval(&self, e: C) -> DMatrix<C> {
        let mut m = self.base.clone();
        for j in 1..=self.ell {
            m[(j, j - 1)] -= e;
        }
        m
    }

    /// Element-wise addend-magnitude matrix at eigenvalue `e`.
    pub fn scale(&self, e: C) -> DMatrix<f64> {
        let mut m = self.base_scale.clone();
        for j in 1..=self.ell {
            m[(j, j - 1)] += e.norm();
        }
        m
    }
}

/// Builds the Bloch system matrix: with rows i = 0..ℓ and columns j = 1..ℓ,
///
/// ```text
/// M_{ij} = K δ_{i,j−1} − E δ_{ij}
///        + K⁻¹ θ₁(2(j+ℓ+1)η) θ₁(2(j−ℓ)η) / (θ₁(2(j+1)η) θ₁(2jη)) δ_{i,j+1}
///        + (δ_{i,0} − δ_{i,1}) K⁻¹ [θ₁(ζ−2(j−i+1)η)/θ₁(ζ)]
///          · θ₁(2(i+ℓ)η) θ₁(2(i−ℓ−1)η) / (θ₁(2η) θ₁(2(j−i+1)η)).
/// ```
pub fn bloch_matrix(ctx: &EllipticContext, zeta: C, k: C) -> Result<BlochMatrix> {
    ctx.guard_theta1_arg(zeta)?;
    if k.norm() < 1e-300 {
        return Err(Error::Domain("Bloch parameter K must be nonzero".into()));
    }
    let ell = ctx.ell as usize;
    let elli = ctx.ell as i64;
    let mut base = DMatrix::from_element(ell + 1, ell, c64(0.0, 0.0));
    let mut base_scale = DMatrix::from_element(ell + 1, ell, 0.0_f64);
    let inv_k = 1.0 / k;
    let inv_tz = 1.0 / ctx.theta1(zeta);
    for i in 0..=ell {
        let ii = i as i64;
        for j in 1..=ell {
            let jj = j as i64;
            let mut v = c64(0.0, 0.0);
            let mut sc = 0.0_f64;
            if ii == jj - 1 {
                v += k;
                sc += k.norm();
            }
            if ii == jj + 1 {
                let t = inv_k * ctx.en(jj + elli + 1) * ctx.en(jj - elli)
                    / (ctx.en(jj + 1) * ctx.en(jj));
                v += t;
                sc += t.norm();
            }
            if i == 0 || i == 1 {
                let sgn = if i == 0 { 1.0 } else { -1.0 };
                let t = sgn
                    * inv_k
                    * ctx.theta1(zeta - 2.0 * ((jj - ii + 1) as f64) * ctx.eta)
                    * inv_tz
                    * ctx.en(ii + elli)
                    * ctx.en(ii - elli - 1)
                    / (ctx.en(1) * ctx.en(jj - ii + 1));
                v += t;
                sc += t.norm();
            }
            base[(i, j - 1)] = v;
            base_scale[(i, j - 1)] = sc;
        }
    }
    Ok(BlochMatrix { base, base_scale, ell })
}

fn hadamard_row_scale(sc: &DMatrix<f64>) -> f64 {
    let mut prod = 1.0_f64;
    for i in 0..sc.nrows() {
        let mut rmax = 0.0_f64;
        for j in 0..sc.ncols() {
            rmax = rmax.max(sc[(i, j)]);
        }
        prod *= rmax;
    }
    prod.max(1e-300)
}

/// Determinants of the two ℓ×ℓ minors of the Bloch system (dropping row 0,
/// respectively row 1), each normalized by the Hadamard product of the
/// row-wise addend scales.  Both vanish on the curve.
pub fn minor_residuals(ctx: &EllipticContext, p: &BlochPoint) -> Result<(f64, f64)> {
    let bm = bloch_matrix(ctx, p.zeta, p.k)?;
    let m = bm.eval(p.e);
    let sc = bm.scale(p.e);
    let mut out = [0.0_f64; 2];
    for (slot, drop_row) in out.iter_mut().zip([0usize, 1]) {
        let minor = m.clone().remove_row(drop_row);
        let det = minor.lu().determinant();
        let h = hadamard_row_scale(&sc.clone().remove_row(drop_row));
        *slot = det.norm() / h;
    }
    Ok((out[0], out[1]))
}

/// Normalized residual |M s|_∞ / |Sc |s||_∞ of the full (ℓ+1)×ℓ Bloch system
/// against the expansion coefficients of a solution.
pub fn full_system_residual(ctx: &EllipticContext, sol: &BlochSolution) -> Result<f64> {
    let bm = bloch_matrix(ctx, sol.point.zeta, sol.point.k)?;
    let m = bm.eval(sol.point.e);
    let sc = bm.scale(sol.point.e);
    let sv = DMatrix::from_column_slice(sol.s.len(), 1, &sol.s);
    let ms = &m * &sv;
    let mut worst = 0.0_f64;
    for i in 0..ms.nrows() {
        let mut den = 0.0_f64;
        for j in 0..sc.ncols() {
            den += sc[(i, j)] * sol.s[j].norm();
        }
        worst = worst.max(ms[(i, 0)].norm() / den.max(1e-300));
    }
    Ok(worst)
}

/// Residuals of the Bloch-multiplier laws ψ(x+1/2) = B₁ ψ(x) and
/// ψ(x+τ/2) = B_τ ψ(x) with B₁ = K^{1/(2η)} (principal branch) and
/// B_τ = K^{τ/(2η)} e^{−2πiζ}, compared as branch-free ψ ratios.
pub fn multiplier_residuals(
    ctx: &EllipticContext,
    sol: &BlochSolution,
    x0: C,
) -> Result<(f64, f64)> {
    let log_k = sol.point.k.ln();
    let b1 = (log_k / (2.0 * ctx.eta)).exp();
    let btau = (log_k * ctx.tau / (2.0 * ctx.eta)).exp()
        * (c64(0.0, -2.0 * std::f64::consts::PI) * sol.point.zeta).exp();
    let p0 = (sol.psi)(x0)?;
    let r1 = ((sol.psi)(x0 + 0.5)? / p0 / b1 - 1.0).norm();
    let rt = ((sol.psi)(x0 + ctx.tau / 2.0)? / p0 / btau - 1.0).norm();
    Ok((r1, rt))
}

/// Band edges from the root/filter route: for each theta index a = 1..4 the
/// two polynomials
///
/// ```text
/// p1(E) = Σ_{j=0}^{ℓ}   θ_a(2(N−j)η) [ℓ;j] A_{jη}(E),
/// p2(E) = Σ_{j=0,j≠1}^{ℓ+1} θ_a(2(N−j)η) θ₁(2(j−1)η) [ℓ+1;j] A_{|j−1|η}(E)
/// ```
///
/// are formed; roots of p1 where the normalized p2 value is below `edge_tol`
/// are edges (a p2 whose coefficients cancel to below the addend scale is
/// identically zero and filters nothing).  The union over a is closed under
/// E → −E and deduplicated.
pub fn band_edges_bloch(ctx: &EllipticContext) -> Result<Vec<C>> {
    let ell = ctx.ell as i64;
    let n_big = ctx.big_n as f64;
    let ladder = a_polys_all(ctx, ell)?;
    let a_poly_of = |j: i64| &ladder[(ell - j) as usize];
    let mut edges: Vec<C> = Vec::new();
    for a in 1..=4u8 {
        let mut p1 = PolynomialC::zero();
        for j in 0..=ell {
            let c = ctx.theta(a, 2.0 * (n_big - j as f64) * ctx.eta)? * ctx.ebin(ell, j)?;
            p1 = p1.add(&a_poly_of(j).scale(c));
        }
        let mut p2 = PolynomialC::zero();
        let mut sc2 = 0.0_f64;
        for j in 0..=(ell + 1) {
            if j == 1 {
                continue;
            }
            let c = ctx.theta(a, 2.0 * (n_big - j as f64) * ctx.eta)?
                * ctx.en(j - 1)
                * ctx.ebin(ell + 1, j)?;
            let ap = a_poly_of((j - 1).abs());
            sc2 = sc2.max(c.norm() * ap.max_mag());
            p2 = p2.add(&ap.scale(c));
        }
        let roots = poly_roots(&p1.trimmed(ctx.tol.trim_tol), ctx.tol.root_tol)?;
        if p2.max_mag() < ctx.tol.trim_tol * sc2 {
            edges.extend(roots);
            continue;
        }
        for r in roots {
            let v = p2.eval(r).norm() / (sc2 * r.norm().max(1.0).powi(ell as i32));
            if v < ctx.tol.edge_tol {
                edges.push(r);
            }
        }
    }
    // Close under E → −E and deduplicate.
    let mut out: Vec<C> = Vec::new();
    for e in edges.iter().copied().chain(edges.iter().map(|e| -e)) {
        if !out.iter().any(|o| (e - o).norm() < 1e-8) {
            out.push(e);
        }
    }
    Ok(out)
}

/// The determinant polynomial D_{2ℓ}(E) from its bordered tridiagonal
/// matrix: size n = 2ℓ, diagonal −E, superdiagonal [i+1]/[ℓ+i+1] and
/// subdiagonal [2ℓ+1+i]/[ℓ+1+i] at row i, and the last row replaced by the
/// entries d_{2k} at columns 2k−1 (k = 1..ℓ) plus [4ℓ+1]/[3ℓ+1] added at
/// column 2ℓ−1, where
///
/// ```text
/// d_{2k} = (−1)^{ℓ−k} ([ℓ+2k]/[k]) [3ℓ;ℓ] [2ℓ+1;ℓ+k] / [2ℓ+k+1;k],
/// ```
///
/// all scaled by (−1)^ℓ ([2ℓ+1]/[ℓ+1]) / [2ℓ;ℓ].
pub fn d_poly(ctx: &EllipticContext) -> Result<PolynomialC> {
    let ell = ctx.ell as i64;
    let n = 2 * ell as usize;
    let neg_e = PolynomialC::monomial(c64(-1.0, 0.0), 1);
    let diag = vec![neg_e; n];
    let mut sup = Vec::with_capacity(n - 1);
    let mut sub = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let kk = k as i64;
        sup.push(ctx.en(kk + 2) / ctx.en(ell + kk + 2));
        // The final subdiagonal entry is covered by the replaced last row
        // and never read; it is filled with the same formula for uniformity.
        sub.push(ctx.en(2 * ell + 3 + kk) / ctx.en(ell + 3 + kk));
    }
    let mut last = vec![c64(0.0, 0.0); n - 1];
    for k in 1..=ell {
        let sign = if (ell - k) % 2 == 0 { 1.0 } else { -1.0 };
        let d2k = sign * ctx.en(ell + 2 * k) / ctx.en(k) * ctx.ebin(3 * ell, ell)?
            * ctx.ebin(2 * ell + 1, ell + k)?
            / ctx.ebin(2 * ell + k + 1, k)?;
        last[(2 * k - 2) as usize] += d2k;
    }
    last[(2 * ell - 2) as usize] += ctx.en(4 * ell + 1) / ctx.en(3 * ell + 1);
    let det = TridiagBordered {
        diag,
        sub,
        sup,
        last_row: Some(last),
    }
    .det()?;
    let sign = if ctx.ell % 2 == 0 { 1.0 } else { -1.0 };
    let pref = sign * ctx.en(2 * ell + 1) / ctx.en(ell + 1) / ctx.ebin(2 * ell, ell)?;
    Ok(det.scale(pref))
}

/// Assembles the hyperelliptic data: T_top = T_{2ℓ+1}(0,E), D = D_{2ℓ}(E),
/// and the even combination
///
/// ```text
/// W²(E) = [2ℓ;ℓ]² ( T_top(E)²/([2ℓ]!)² − 4 D(E) ) = P(E²)
/// ```
///
/// reduced to the monic polynomial P(y) of degree 2ℓ+1 in y = E².
pub fn hyperelliptic(ctx: &EllipticContext) -> Result<HyperData> {
    let ell = ctx.ell as i64;
    let t_top = t_top_zero(ctx)?;
    let d = d_poly(ctx)?;
    let f2 = ctx.efac(2 * ell)?;
    let binom = ctx.ebin(2 * ell, ell)?;
    let tt = t_top.mul(&t_top).scale(1.0 / (f2 * f2));
    let w2 = tt.sub(&d.scale(c64(4.0, 0.0))).scale(binom * binom);
    let odd = w2.parity_residual(0);
    if odd > 1e-10 {
        return Err(Error::Consistency(format!(
            "hyperelliptic combination is not even in E: odd-part residual {odd:.3e}"
        )));
    }
    let p = w2.compress_parity(0).trimmed(ctx.tol.trim_tol);
    if p.degree() != Some(2 * ctx.ell as usize + 1) {
        return Err(Error::DegreeMismatch(format!(
            "P(y) has degree {:?}, expected {}",
            p.degree(),
            2 * ctx.ell + 1
        )));
    }
    Ok(HyperData { t_top, d, p })
}

/// Band edges from the hyperelliptic route: both square roots of every root
/// of P(y).  Nearly coincident roots of P are reported as a numerical limit
/// (edges would not be simple).
pub fn band_edges_hyper(ctx: &EllipticContext) -> Result<Vec<C>> {
    let hyper = hyperelliptic(ctx)?;
    let ys = poly_roots(&hyper.p, ctx.tol.root_tol)?;
    for (i, a) in ys.iter().enumerate() {
        for b in ys.iter().take(i) {
            if (a - b).norm() <= 1e-6 {
                return Err(Error::NumericalLimit(format!(
                    "near-multiple roots of P: |{a} - {b}| <= 1e-6"
                )));
            }
        }
    }
    let mut out = Vec::with_capacity(2 * ys.len());
    for y in ys {
        let e = y.sqrt();
        out.push(e);
        out.push(-e);
    }
    Ok(out)
}

/// Greedy multiset matching: pairs each element of `a` with its nearest
/// remaining element of `b` and returns the worst pairwise distance, or
/// `None` when the sizes differ.
pub fn multiset_match(a: &[C], b: &[C]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pool: Vec<C> = b.to_vec();
    let mut worst = 0.0_f64;
    for &x in a {
        let (idx, dist) = pool
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.partial_cmp(&q.1).expect("finite distances"))?;
        worst = worst.max(dist);
        pool.swap_remove(idx);
    }
    Some(worst)
}

/// The value w = 2z − T_{2ℓ+1}(0,E)/[2ℓ]! at a curve point, where z is the
/// A_{(ℓ+1)η} eigenvalue; verifies w² = [2ℓ;ℓ]⁻² P(E²) before returning.
pub fn w_value(ctx: &EllipticContext, p: &BlochPoint, z: C) -> Result<C> {
    let ell = ctx.ell as i64;
    let hyper = hyperelliptic(ctx)?;
    let w = 2.0 * z - hyper.t_top.eval(p.e) / ctx.efac(2 * ell)?;
    let binom = ctx.ebin(2 * ell, ell)?;
    let rhs = hyper.p.eval(p.e * p.e) / (binom * binom);
    let resid = (w * w - rhs).norm() / (1.0 + (w * w).norm() + rhs.norm());
    if resid > 1e-8 {
        return Err(Error::Consistency(format!(
            "w² does not match the hyperelliptic polynomial: residual {resid:.3e}"
        )));
    }
    Ok(w)
}

/// The auxiliary pair (ε, ξ) attached to a curve point with eigenvalues
/// (E, z):
///
/// ```text
/// ε = ([ℓ−1][ℓ] / ([2ℓ][2ℓ−1])) (E² + [1][2ℓ]/([ℓ−1][ℓ])),
/// ξ = ([ℓ+1]/[1]) (E z − [2ℓ+1]/[ℓ+1]).
/// ```
///
/// ε involves [ℓ−1] and is only defined for ℓ ≥ 2.
pub fn epsilon_xi(ctx: &EllipticContext, e: C, z: C) -> Result<(C, C)> {
    let ell = ctx.ell as i64;
    if ell < 2 {
        return Err(Error::Unsupported(
            "epsilon is undefined at ell = 1 (the factor [ell-1] vanishes)".into(),
        ));
    }
    let eps = ctx.en(ell - 1) * ctx.en(ell) / (ctx.en(2 * ell) * ctx.en(2 * ell - 1))
        * (e * e + ctx.en(1) * ctx.en(2 * ell) / (ctx.en(ell - 1) * ctx.en(ell)));
    let xi = ctx.en(ell + 1) / ctx.en(1) * (e * z - ctx.en(2 * ell + 1) / ctx.en(ell + 1));
    Ok((eps, xi))
}

/// Convergence data for the two points above E = ∞.
#[derive(Debug, Clone)]
pub struct AsymptoticsReport {
    /// |E/K − 1| on the large-K branch at distances 1e−3 and 1e−4 from ζ = 0.
    pub plus_dev: (f64, f64),
    /// |E·K − 1| on the small-K branch at the same distances from ζ = 4Nη.
    pub minus_dev: (f64, f64),
    /// Deviation ratios between the two distances (expected ≈ 10).
    pub shrink: (f64, f64),
    /// Relative error of K²θ₁(ζ) against −[ℓ][ℓ+1]/[1] near ζ = 0.
    pub k2_law: (f64, f64),
}

/// Samples the fibres near ζ = 0 and ζ = 4Nη and verifies the leading
/// asymptotics: E = K^{±1} + o(K^{±1}) with the deviation shrinking by
/// roughly 10× per decade, and K²θ₁(ζ) → −[ℓ][ℓ+1]/[1] at the ζ → 0 end
/// (within 5% at distance 1e−3 and 0.5% at 1e−4).
pub fn asymptotics_check(ctx: &EllipticContext) -> Result<AsymptoticsReport> {
    let ell = ctx.ell as i64;
    let dir = c64(1.0, 0.3);
    let lim = -ctx.en(ell) * ctx.en(ell + 1) / ctx.en(1);
    let mut plus = [0.0_f64; 2];
    let mut k2 = [0.0_f64; 2];
    for (slot, d) in [1e-3, 1e-4].iter().enumerate() {
        let zeta = *d * dir;
        let sols = fibre_over_zeta(ctx, zeta)?;
        let big = sols
            .iter()
            .max_by(|a, b| {
                a.point.k.norm().partial_cmp(&b.point.k.norm()).expect("finite K")
            })
            .ok_or_else(|| Error::Asymptotics("empty fibre near zeta = 0".into()))?;
        plus[slot] = (big.point.e / big.point.k - 1.0).norm();
        k2[slot] = (big.point.k * big.point.k * ctx.theta1(zeta) / lim - 1.0).norm();
    }
    let mut minus = [0.0_f64; 2];
    let base = 4.0 * (ctx.big_n as f64) * ctx.eta;
    for (slot, d) in [1e-3, 1e-4].iter().enumerate() {
        let zeta = base + *d * dir;
        let sols = fibre_over_zeta(ctx, zeta)?;
        let small = sols
            .iter()
            .min_by(|a, b| {
                a.point.k.norm().partial_cmp(&b.point.k.norm()).expect("finite K")
            })
            .ok_or_else(|| Error::Asymptotics("empty fibre near zeta = 4N eta".into()))?;
        minus[slot] = (small.point.e * small.point.k - 1.0).norm();
    }
    let shrink = (plus[0] / plus[1].max(1e-300), minus[0] / minus[1].max(1e-300));
    for (name, s) in [("zeta -> 0", shrink.0), ("zeta -> 4N eta", shrink.1)] {
        if !(5.0..=20.0).contains(&s) {
            return Err(Error::Asymptotics(format!(
                "deviation at {name} shrinks by {s:.2}x per decade, expected ~10x"
            )));
        }
    }
    if k2[0] > 0.05 || k2[1] > 0.005 {
        return Err(Error::Asymptotics(format!(
            "K² θ₁(ζ) law violated near zeta = 0: relative errors ({:.3e}, {:.3e})",
            k2[0], k2[1]
        )));
    }
    Ok(AsymptoticsReport {
        plus_dev: (plus[0], plus[1]),
        minus_dev: (minus[0], minus[1]),
        shrink,
        k2_law: (k2[0], k2[1]),
    })
}

/// Assembles the full spectral-curve data and verifies the structural
/// invariants: C₀ = 1 with palindromic coefficients, and both band-edge
/// multisets symmetric under E → −E.
pub fn spectral_curve(ctx: &EllipticContext) -> Result<SpectralCurve> {
    let c = curve_coeffs(ctx)?;
    let n_big = ctx.big_n as usize;
    let cmax = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if (c[0] - 1.0).norm() > 1e-10 {
        return Err(Error::Consistency(format!("C_0 = {} differs from 1", c[0])));
    }
    for j in 0..=n_big {
        if (c[j] - c[n_big - j]).norm() > 1e-10 * cmax {
            return Err(Error::Consistency(format!(
                "coefficient palindrome violated at j = {j}"
            )));
        }
    }
    let hyper = hyperelliptic(ctx)?;
    let edges_bloch = band_edges_bloch(ctx)?;
    let edges_hyper = band_edges_hyper(ctx)?;
    for edges in [&edges_bloch, &edges_hyper] {
        let reflected: Vec<C> = edges.iter().map(|e| -e).collect();
        match multiset_match(edges, &reflected) {
            Some(w) if w < 1e-6 => {}
            other => {
                return Err(Error::Consistency(format!(
                    "band edges are not symmetric under E -> -E (match: {other:?})"
                )))
            }
        }
    }
    Ok(SpectralCurve { c, hyper, edges_bloch, edges_hyper })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(ell: u32) -> EllipticContext {
        EllipticContext::default_params(ell).unwrap()
    }

    #[test]
    fn coefficients_match_small_closed_forms() {
        let c1 = ctx(1);
        let co = curve_coeffs(&c1).unwrap();
        assert_eq!(co.len(), 2);
        assert!((co[0] - c64(1.0, 0.0)).norm() < 1e-13);
        assert!((co[1] - c64(1.0, 0.0)).norm() < 1e-13);
        let c2 = ctx(2);
        let co = curve_coeffs(&c2).unwrap();
        assert_eq!(co.len(), 4);
        let mid = c2.en(3) / c2.en(1);
        assert!((co[1] - mid).norm() < 1e-13 * mid.norm());
        assert!((co[2] - mid).norm() < 1e-13 * mid.norm());
        // Palindrome for larger spins.
        for ell in [3u32, 4] {
            let c = ctx(ell);
            let co = curve_coeffs(&c).unwrap();
            let n = co.len() - 1;
            let cmax = co.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for j in 0..=n {
                assert!((co[j] - co[n - j]).norm() < 1e-12 * cmax);
            }
        }
    }

    #[test]
    fn coefficient_matrix_determinant_tracks_covering_form() {
        // det(K^{2m}δ + G) is proportional to the covering form divided by
        // θ₁(ζ), with a (ζ, K)-independent constant.
        let c = ctx(2);
        let co = curve_coeffs(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ratios = Vec::new();
        for _ in 0..3 {
            let zeta = c64(rng.random_range(0.1..0.9), rng.random_range(0.05..0.3));
            let k = c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let m = coefficient_matrix(&c, zeta, k).unwrap();
            let det = m.lu().determinant();
            let (s, _) = curve_eval(&c, &co, zeta, k);
            ratios.push(det / (s / c.theta1(zeta)));
        }
        for r in &ratios[1..] {
            assert!(
                (r - ratios[0]).norm() < 1e-9 * ratios[0].norm(),
                "{r} vs {}",
                ratios[0]
            );
        }
    }

    #[test]
    fn fibre_structure_for_smallest_spin() {
        let c = ctx(1);
        let zeta = c64(0.31, 0.17);
        let sols = fibre_over_zeta(&c, zeta).unwrap();
        assert_eq!(sols.len(), 2);
        // Reflection pairing: the two eigenvalues are negatives.
        assert!((sols[0].point.e + sols[1].point.e).norm() < 1e-9 * sols[0].point.e.norm());
        for sol in &sols {
            assert!(sol.eigen_residual < 1e-8);
            assert!(sol.glue_residual < 1e-9);
            let (m0, m1) = minor_residuals(&c, &sol.point).unwrap();
            assert!(m0 < c.tol.point_tol && m1 < c.tol.point_tol, "({m0:.2e},{m1:.2e})");
            assert!(full_system_residual(&c, sol).unwrap() < c.tol.point_tol);
            let (r1, rt) = multiplier_residuals(&c, sol, c64(0.23, 0.07)).unwrap();
            assert!(r1 < 1e-8 && rt < 1e-8, "multipliers ({r1:.2e},{rt:.2e})");
        }
    }

    #[test]
    fn fibre_size_and_q_normalization_for_spin_two() {
        let c = ctx(2);
        let sols = fibre_over_zeta(&c, c64(0.33, 0.19)).unwrap();
        assert_eq!(sols.len(), 6);
        let q1 = sols[0]
            .q_value(&c, 2.0 * (c.ell as f64) * c.eta)
            .unwrap();
        assert!((q1 - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn determinant_polynomial_matches_closed_form() {
        // ℓ=1: D₂(E) = −([1]/[2]) { ([3]/[2]) E² − [2]³/[1]³ }.
        let c = ctx(1);
        let d = d_poly(&c).unwrap();
        let pref = -c.en(1) / c.en(2);
        let golden = PolynomialC::new(vec![
            pref * (-(c.en(2) * c.en(2) * c.en(2)) / (c.en(1) * c.en(1) * c.en(1))),
            c64(0.0, 0.0),
            pref * (c.en(3) / c.en(2)),
        ]);
        assert!(d.rel_diff(&golden) < 1e-12, "{:.3e}", d.rel_diff(&golden));
        // The (2ℓ, 2ℓ−1) matrix element for ℓ = 1 and 2.
        for ell in [1u32, 2] {
            let c = ctx(ell);
            let l = ell as i64;
            let d2l = c.en(3 * l) / c.en(l) * c.ebin(3 * l, l).unwrap()
                * c.ebin(2 * l + 1, 2 * l).unwrap()
                / c.ebin(3 * l + 1, l).unwrap();
            let elem = d2l + c.en(4 * l + 1) / c.en(3 * l + 1);
            let pred = c.en(l + 1) * c.en(2 * l) * c.en(2 * l)
                / (c.en(1) * c.en(l) * c.en(l));
            assert!((elem - pred).norm() < 1e-12 * pred.norm(), "ell={ell}");
        }
    }

    #[test]
    fn hyperelliptic_polynomial_is_monic_of_right_degree() {
        for ell in [1u32, 2] {
            let c = ctx(ell);
            let h = hyperelliptic(&c).unwrap();
            let deg = 2 * ell as usize + 1;
            assert_eq!(h.p.degree(), Some(deg));
            assert!((h.p.coeff(deg) - c64(1.0, 0.0)).norm() < 1e-9);
            assert!(h.d.parity_residual(0) < 1e-12);
            assert!(h.t_top.parity_residual(1) < 1e-10);
        }
    }

    #[test]
    fn band_edges_agree_between_routes() {
        let c = ctx(1);
        let eb = band_edges_bloch(&c).unwrap();
        let eh = band_edges_hyper(&c).unwrap();
        assert_eq!(eb.len(), 6);
        assert_eq!(eh.len(), 6);
        let worst = multiset_match(&eb, &eh).unwrap();
        assert!(worst < 1e-6, "edge mismatch {worst:.3e}");
    }

    #[test]
    fn w_and_z_satisfy_trace_identity() {
        let c = ctx(1);
        let sols = fibre_over_zeta(&c, c64(0.27, 0.11)).unwrap();
        let sol = &sols[0];
        let z = sol.a_top_eigenvalue(&c).unwrap();
        // z + D(E)/z = T_top(E)/[2ℓ]!.
        let h = hyperelliptic(&c).unwrap();
        let lhs = z + h.d.eval(sol.point.e) / z;
        let rhs = h.t_top.eval(sol.point.e) / c.efac(2).unwrap();
        assert!((lhs - rhs).norm() / (1.0 + lhs.norm() + rhs.norm()) < 1e-9);
        let w = w_value(&c, &sol.point, z).unwrap();
        assert!((w - (2.0 * z - rhs)).norm() < 1e-12 * (1.0 + w.norm()));
    }

    #[test]
    fn epsilon_xi_guards_and_parity() {
        let c1 = ctx(1);
        assert!(matches!(
            epsilon_xi(&c1, c64(1.0, 0.0), c64(1.0, 0.0)),
            Err(Error::Unsupported(_))
        ));
        let c2 = ctx(2);
        let e = c64(0.7, 0.2);
        let z = c64(0.4, -0.3);
        let (eps1, _) = epsilon_xi(&c2, e, z).unwrap();
        let (eps2, _) = epsilon_xi(&c2, -e, z).unwrap();
        assert!((eps1 - eps2).norm() < 1e-14 * eps1.norm());
    }

    #[test]
    fn spectral_curve_assembles_with_invariants() {
        let c = ctx(1);
        let sc = spectral_curve(&c).unwrap();
        assert_eq!(sc.c.len(), 2);
        assert_eq!(sc.edges_bloch.len(), sc.edges_hyper.len());
    }

    #[test]
    fn multiset_match_reports_worst_pairing() {
        let a = [c64(1.0, 0.0), c64(2.0, 0.0)];
        let b = [c64(2.0, 1e-9), c64(1.0, 0.0)];
        let w = multiset_match(&a, &b).unwrap();
        assert!((w - 1e-9).abs() < 1e-12);
        assert!(multiset_match(&a, &b[..1]).is_none());
    }
}
