//! Difference operators with meromorphic coefficient functions.
//!
//! An operator is a finite sum `Σ_i c_i(x) e^{s_i ∂}` acting on functions by
//!
//! ```text
//! (O f)(x) = Σ_i c_i(x) f(x + s_i),
//! ```
//!
//! stored as a list of (shift, coefficient) terms.  Shifts that coincide up
//! to a small absolute tolerance are merged.  The module provides the
//! Sklyanin operators S_a, the one-parameter family A_λ, the intertwiner Ŵ,
//! bases of the even theta spaces Θ⁺_{4ℓ}, and seeded residual checks between
//! operators.

use crate::error::{Error, Result};
use crate::theta::{c64, C, EllipticContext};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Shared complex-valued function of one complex variable; evaluation may
/// fail (e.g. when a coefficient is evaluated too close to a pole).
pub type FnC = Arc<dyn Fn(C) -> Result<C> + Send + Sync>;

/// Absolute shift-merging tolerance for operators built on `ctx`.
pub fn shift_merge_abs(ctx: &EllipticContext) -> f64 {
    ctx.tol.shift_merge_tol * ctx.eta.norm()
}

/// A finite difference operator `Σ_i c_i(x) e^{s_i ∂}`.
#[derive(Clone)]
pub struct DifferenceOperator {
    /// (shift, coefficient) terms; shifts are pairwise distinct beyond
    /// `merge_tol`.
    pub terms: Vec<(C, FnC)>,
    /// Absolute tolerance below which two shifts are identified.
    pub merge_tol: f64,
}

impl std::fmt::Debug for DifferenceOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DifferenceOperator")
            .field("shifts", &self.terms.iter().map(|(s, _)| *s).collect::<Vec<_>>())
            .field("merge_tol", &self.merge_tol)
            .finish()
    }
}

impl DifferenceOperator {
    /// The empty (zero) operator.
    pub fn new(merge_tol: f64) -> Self {
        DifferenceOperator { terms: Vec::new(), merge_tol }
    }

    /// The identity operator (single term, zero shift, unit coefficient).
    pub fn identity(merge_tol: f64) -> Self {
        let mut op = Self::new(merge_tol);
        op.push_term(c64(0.0, 0.0), Arc::new(|_x| Ok(c64(1.0, 0.0))));
        op
    }

    /// Shifts currently present, in insertion order.
    pub fn shifts(&self) -> Vec<C> {
        self.terms.iter().map(|(s, _)| *s).collect()
    }

    /// Adds a term, merging with an existing one when the shifts agree
    /// within `merge_tol`.
    pub fn push_term(&mut self, shift: C, coeff: FnC) {
        for (s, c) in self.terms.iter_mut() {
            if (*s - shift).norm() <= self.merge_tol {
                let old = Arc::clone(c);
                *c = Arc::new(move |x| Ok(old(x)? + coeff(x)?));
                return;
            }
        }
        self.terms.push((shift, coeff));
    }

    /// Applies the operator to `f` at the point `x`.
    pub fn apply<F>(&self, f: &F, x: C) -> Result<C>
    where
        F: Fn(C) -> Result<C> + ?Sized,
    {
        let mut acc = c64(0.0, 0.0);
        for (s, c) in &self.terms {
            acc += c(x)? * f(x + s)?;
        }
        Ok(acc)
    }

    /// Applies the operator and also returns the addend scale
    /// `Σ_i |c_i(x) f(x+s_i)|`, the natural normalization for cancellation
    /// (annihilation) checks.
    pub fn apply_with_scale<F>(&self, f: &F, x: C) -> Result<(C, f64)>
    where
        F: Fn(C) -> Result<C> + ?Sized,
    {
        let mut acc = c64(0.0, 0.0);
        let mut scale = 0.0_f64;
        for (s, c) in &self.terms {
            let t = c(x)? * f(x + s)?;
            scale += t.norm();
            acc += t;
        }
        Ok((acc, scale))
    }

    /// Operator composition: `(self ∘ other)(f) = self(other(f))`.
    pub fn compose(&self, other: &DifferenceOperator) -> DifferenceOperator {
        let mut out = Self::new(self.merge_tol.max(other.merge_tol));
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                let (s1c, c1c, c2c) = (*s1, Arc::clone(c1), Arc::clone(c2));
                out.push_term(
                    s1c + s2,
                    Arc::new(move |x| Ok(c1c(x)? * c2c(x + s1c)?)),
                );
            }
        }
        out
    }

    /// Pointwise sum of operators.
    pub fn add(&self, other: &DifferenceOperator) -> DifferenceOperator {
        let mut out = Self::new(self.merge_tol.max(other.merge_tol));
        for (s, c) in self.terms.iter().chain(other.terms.iter()) {
            out.push_term(*s, Arc::clone(c));
        }
        out
    }

    /// Pointwise difference of operators.
    pub fn sub(&self, other: &DifferenceOperator) -> DifferenceOperator {
        self.add(&other.scale(c64(-1.0, 0.0)))
    }

    /// Scalar multiple.
    pub fn scale(&self, a: C) -> DifferenceOperator {
        let terms = self
            .terms
            .iter()
            .map(|(s, c)| {
                let cc = Arc::clone(c);
                let term: FnC = Arc::new(move |x| Ok(a * cc(x)?));
                (*s, term)
            })
            .collect();
        DifferenceOperator { terms, merge_tol: self.merge_tol }
    }

    /// Conjugation by the parity operator (Ξf)(x) = f(−x): the term
    /// `c(x) e^{s∂}` becomes `c(−x) e^{−s∂}`, so that
    /// `(ΞOΞ)(f)(x) = (O(f(−·)))(−x)`.
    pub fn parity_conjugate(&self) -> DifferenceOperator {
        let terms = self
            .terms
            .iter()
            .map(|(s, c)| {
                let cc = Arc::clone(c);
                let term: FnC = Arc::new(move |x| cc(-x));
                (-*s, term)
            })
            .collect();
        DifferenceOperator { terms, merge_tol: self.merge_tol }
    }
}

/// Seeded generator for random test functions and sample points used by
/// operator identity checks.  Functions are short Fourier sums
/// `Σ_{k=−3}^{3} c_k e^{2πikx}` (entire and 1-periodic); sample points live
/// in the rectangle Re ∈ [−0.45, 0.45], Im ∈ [0.02, 0.22], which stays clear
/// of the θ₁ zero lattice for the default parameters.
pub struct TestFunctionFamily {
    rng: ChaCha8Rng,
}

impl TestFunctionFamily {
    /// Creates a family with the given RNG seed.
    pub fn new(seed: u64) -> Self {
        TestFunctionFamily { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Draws a fresh random Fourier sum.
    pub fn fourier(&mut self) -> FnC {
        let coeffs: Vec<C> = (0..7)
            .map(|_| c64(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0)))
            .collect();
        Arc::new(move |x| {
            let tau2 = 2.0 * std::f64::consts::PI;
            let mut acc = c64(0.0, 0.0);
            for (i, &ck) in coeffs.iter().enumerate() {
                let k = i as f64 - 3.0;
                acc += ck * (c64(0.0, tau2 * k) * x).exp();
            }
            Ok(acc)
        })
    }

    /// Draws a sample point in the test rectangle.
    pub fn point(&mut self) -> C {
        c64(
            self.rng.random_range(-0.45..0.45),
            self.rng.random_range(0.02..0.22),
        )
    }

    /// Draws `n` sample points.
    pub fn points(&mut self, n: usize) -> Vec<C> {
        (0..n).map(|_| self.point()).collect()
    }
}

/// Worst normalized disagreement `|O₁f − O₂f| / (1 + |O₁f| + |O₂f|)` over
/// `n_funcs` random test functions and `n_points` sample points each.
/// Points whose evaluation lands on a coefficient pole are skipped and
/// redrawn, with a retry budget of three extra draws per requested point;
/// exhausting the budget raises `NumericalLimit`.
pub fn op_residual(
    op1: &DifferenceOperator,
    op2: &DifferenceOperator,
    family: &mut TestFunctionFamily,
    n_funcs: usize,
    n_points: usize,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for _ in 0..n_funcs {
        let f = family.fourier();
        let mut accepted = 0usize;
        let mut draws = 0usize;
        while accepted < n_points {
            draws += 1;
            if draws > 4 * n_points {
                return Err(Error::NumericalLimit(
                    "operator residual check exhausted its pole-retry budget".into(),
                ));
            }
            let x = family.point();
            let pair = (op1.apply(&*f, x), op2.apply(&*f, x));
            match pair {
                (Ok(v1), Ok(v2)) => {
                    worst = worst.max((v1 - v2).norm() / (1.0 + v1.norm() + v2.norm()));
                    accepted += 1;
                }
                (Err(Error::Pole { .. }), _) | (_, Err(Error::Pole { .. })) => continue,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
    }
    Ok(worst)
}

/// Worst normalized value `|Of| / Σ|addends|` over `n_points` sample points,
/// measuring how completely the operator annihilates `f`.  Pole hits are
/// redrawn under the same budget as [`op_residual`].
pub fn op_annihilation_residual(
    op: &DifferenceOperator,
    f: &FnC,
    family: &mut TestFunctionFamily,
    n_points: usize,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    let mut accepted = 0usize;
    let mut draws = 0usize;
    while accepted < n_points {
        draws += 1;
        if draws > 4 * n_points {
            return Err(Error::NumericalLimit(
                "annihilation check exhausted its pole-retry budget".into(),
            ));
        }
        let x = family.point();
        match op.apply_with_scale(&**f, x) {
            Ok((v, scale)) => {
                if scale > 0.0 {
                    worst = worst.max(v.norm() / scale);
                }
                accepted += 1;
            }
            Err(Error::Pole { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

/// The Sklyanin operator S_a, a = 0..3, for twice-spin `t` (spin t/2, which
/// may be a half-integer or, for the intertwined module, negative):
///
/// ```text
/// (S_a f)(x) = [θ_{a+1}(2x − tη) f(x+η) − θ_{a+1}(−2x − tη) f(x−η)] / θ₁(2x).
/// ```
pub fn build_sklyanin(ctx: &EllipticContext, a: u8, twice_spin: i64) -> Result<DifferenceOperator> {
    if a > 3 {
        return Err(Error::Domain(format!("Sklyanin index {a} outside 0..3")));
    }
    let shared = Arc::new(ctx.clone());
    let mut op = DifferenceOperator::new(shift_merge_abs(ctx));
    let t = twice_spin as f64;
    let (cp_ctx, cm_ctx) = (Arc::clone(&shared), shared);
    op.push_term(
        ctx.eta,
        Arc::new(move |x| {
            let num = cp_ctx.theta(a + 1, 2.0 * x - t * cp_ctx.eta)?;
            Ok(num * cp_ctx.inv_theta1(2.0 * x)?)
        }),
    );
    op.push_term(
        -ctx.eta,
        Arc::new(move |x| {
            let num = cm_ctx.theta(a + 1, -2.0 * x - t * cm_ctx.eta)?;
            Ok(-num * cm_ctx.inv_theta1(2.0 * x)?)
        }),
    );
    Ok(op)
}

/// The operator A_λ of the commuting one-parameter family for the context's
/// integer spin ℓ:
///
/// ```text
/// A_λ = Σ_{k=0}^{ℓ} c_k(x) e^{((2k−ℓ)η + λ)∂},
/// c_k(x) = (−1)^k ([ℓ]!/[2ℓ]!) [ℓ;k]
///          Π_{j=0}^{ℓ−k−1} θ₁(2x+2(ℓ−j)η) θ₁(2λ+2(ℓ−j)η) / θ₁(2x+2λ+2(k−j)η)
///          Π_{j=0}^{k−1}  θ₁(2x−2(ℓ−j)η) θ₁(2λ−2(ℓ−j)η) / θ₁(2x+2λ+2(k+j−ℓ)η).
/// ```
pub fn build_a(ctx: &EllipticContext, lambda: C) -> Result<DifferenceOperator> {
    let ell = ctx.ell as i64;
    let shared = Arc::new(ctx.clone());
    let mut op = DifferenceOperator::new(shift_merge_abs(ctx));
    let pref_base = shared.efac(ell)? / shared.efac(2 * ell)?;
    for k in 0..=ell {
        let cx = Arc::clone(&shared);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let pref = sign * pref_base * cx.ebin(ell, k)?;
        let shift = ((2 * k - ell) as f64) * ctx.eta + lambda;
        op.push_term(
            shift,
            Arc::new(move |x| {
                let eta = cx.eta;
                let mut c = pref;
                for j in 0..(ell - k) {
                    let m = (ell - j) as f64;
                    c *= cx.theta1(2.0 * x + 2.0 * m * eta)
                        * cx.theta1(2.0 * lambda + 2.0 * m * eta)
                        * cx.inv_theta1(2.0 * x + 2.0 * lambda + 2.0 * ((k - j) as f64) * eta)?;
                }
                for j in 0..k {
                    let m = (ell - j) as f64;
                    c *= cx.theta1(2.0 * x - 2.0 * m * eta)
                        * cx.theta1(2.0 * lambda - 2.0 * m * eta)
                        * cx.inv_theta1(
                            2.0 * x + 2.0 * lambda + 2.0 * ((k + j - ell) as f64) * eta,
                        )?;
                }
                Ok(c)
            }),
        );
    }
    Ok(op)
}

/// The intertwiner Ŵ for twice-spin `t ≥ 1`, a 2ℓ+2-term operator
/// (t = 2ℓ) with shifts (t−2k+1)η, k = 0..t+1:
///
/// ```text
/// c_k(x) = (−1)^k [t+1; k] θ₁(2x + 2(t−2k+1)η)
///          / ( Π_{j=0}^{t−k+1} θ₁(2x+2jη) · Π_{j'=1}^{k} θ₁(2x−2j'η) ).
/// ```
///
/// It satisfies S_a^{(−t/2−1)} Ŵ = Ŵ S_a^{(t/2)} and annihilates the even
/// theta space Θ⁺_{2t}.
pub fn build_intertwiner(ctx: &EllipticContext, twice_spin: i64) -> Result<DifferenceOperator> {
    if twice_spin < 1 {
        return Err(Error::Domain(format!(
            "intertwiner needs twice-spin >= 1, got {twice_spin}"
        )));
    }
    let t = twice_spin;
    let shared = Arc::new(ctx.clone());
    let mut op = DifferenceOperator::new(shift_merge_abs(ctx));
    for k in 0..=(t + 1) {
        let cx = Arc::clone(&shared);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let pref = sign * cx.ebin(t + 1, k)?;
        let shift = ((t - 2 * k + 1) as f64) * ctx.eta;
        op.push_term(
            shift,
            Arc::new(move |x| {
                let eta = cx.eta;
                let num = cx.theta1(2.0 * x + 2.0 * ((t - 2 * k + 1) as f64) * eta);
                let mut c = pref * num;
                for j in 0..=(t - k + 1) {
                    c *= cx.inv_theta1(2.0 * x + 2.0 * (j as f64) * eta)?;
                }
                for jp in 1..=k {
                    c *= cx.inv_theta1(2.0 * x - 2.0 * (jp as f64) * eta)?;
                }
                Ok(c)
            }),
        );
    }
    Ok(op)
}

/// A numerically independent basis of the even theta space Θ⁺_n for
/// n = 4ℓ: each member is a ±-paired product
/// `F(x) = Π_{i=1}^{n/2} θ₁(x−p_i) θ₁(x+p_i)` with random nodes p_i, giving
/// dim Θ⁺_n = n/2 + 1 functions.  The construction verifies the monodromy
/// `F(x+1) = F(x)`, `F(x+τ) = e^{−iπnτ−2πinx} F(x)` and checks numerical
/// rank on a grid of 3·dim points, reseeding up to eight times before giving
/// up with a `Construction` error.
pub fn theta_basis(ctx: &EllipticContext, seed: u64) -> Result<Vec<FnC>> {
    let n = 4 * ctx.ell as usize;
    let dim = 2 * ctx.ell as usize + 1;
    let max_retries = 8;
    for attempt in 0..max_retries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let shared = Arc::new(ctx.clone());
        let mut fns: Vec<FnC> = Vec::with_capacity(dim);
        for _ in 0..dim {
            let pts: Vec<C> = (0..n / 2)
                .map(|_| c64(rng.random_range(0.1..0.4), rng.random_range(0.05..0.3)))
                .collect();
            let cx = Arc::clone(&shared);
            fns.push(Arc::new(move |x| {
                let mut v = c64(1.0, 0.0);
                for &p in &pts {
                    v *= cx.theta1(x - p) * cx.theta1(x + p);
                }
                Ok(v)
            }));
        }
        // Monodromy of each member (n is even, so both periods are plain).
        let x0 = c64(0.23, 0.11);
        let ipi = c64(0.0, std::f64::consts::PI);
        let mono_tau = (-ipi * (n as f64) * ctx.tau - 2.0 * ipi * (n as f64) * x0).exp();
        let mut ok = true;
        for f in &fns {
            let v0 = f(x0)?;
            let v1 = f(x0 + 1.0)?;
            let vt = f(x0 + ctx.tau)?;
            if (v1 / v0 - 1.0).norm() > 1e-8 || (vt / (mono_tau * v0) - 1.0).norm() > 1e-8 {
                ok = false;
                break;
            }
        }
        if !ok {
            return Err(Error::Construction(
                "theta-basis member violates the required monodromy".into(),
            ));
        }
        // Numerical rank on a 3·dim grid with column normalization.
        let mut grid_rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt).wrapping_add(777));
        let rows = 3 * dim;
        let mut m = DMatrix::from_element(rows, dim, c64(0.0, 0.0));
        for i in 0..rows {
            let x = c64(
                grid_rng.random_range(-0.45..0.45),
                grid_rng.random_range(0.02..0.22),
            );
            for (j, f) in fns.iter().enumerate() {
                m[(i, j)] = f(x)?;
            }
        }
        for j in 0..dim {
            let colmax = (0..rows).map(|i| m[(i, j)].norm()).fold(0.0, f64::max);
            if colmax > 0.0 {
                for i in 0..rows {
                    m[(i, j)] /= colmax;
                }
            }
        }
        let sv = m.svd(false, false).singular_values;
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let rank = sv.iter().filter(|&&s| s > 1e-10 * smax).count();
        if rank == dim {
            return Ok(fns);
        }
    }
    Err(Error::Construction(format!(
        "could not draw a rank-{dim} theta basis in {max_retries} attempts"
    )))
}
