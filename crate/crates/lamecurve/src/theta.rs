//! Jacobi theta functions, elliptic numbers/factorials/binomials, and the
//! kernel Φ, together with the immutable parameter context they live on.
//!
//! Conventions: θ₁ is the classical *odd* Jacobi theta function
//!
//! ```text
//! θ₁(x|τ) = 2 Σ_{k≥0} (−1)^k q^{(k+½)²} sin((2k+1)πx),   q = e^{iπτ},
//! ```
//!
//! so that θ₁(x±½) = ±θ₂(x), θ₁(x±τ/2) = ±i e^{−iπτ/4 ∓ iπx} θ₄(x) and
//! θ₁(x±(1+τ)/2) = ±e^{−iπτ/4 ∓ iπx} θ₃(x) hold exactly as stated; θ₂, θ₃, θ₄
//! follow the standard series.  The elliptic number is `[n] = θ₁(2nη)`, the
//! elliptic factorial `[n]! = [1][2]⋯[n]`, and the elliptic binomial the
//! corresponding ratio.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C = Complex64;

/// Convenience constructor for complex values.
#[inline]
pub fn c64(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Tolerance and guard parameters shared by all modules.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Theta-series truncation threshold relative to the largest term.
    pub series_tol: f64,
    /// Identity-residual tolerance (shift identities, genericity checks).
    pub check_tol: f64,
    /// Lattice-distance radius around θ₁ zeros that raises a pole error.
    pub pole_guard: f64,
    /// Trailing-coefficient trim threshold for polynomials.
    pub trim_tol: f64,
    /// Root residual tolerance for polynomial root extraction.
    pub root_tol: f64,
    /// Fresh-point verification tolerance for interpolation.
    pub interp_tol: f64,
    /// Shift identification tolerance in units of |η| for operator composition.
    pub shift_merge_tol: f64,
    /// Relative singular-value gap accepted as a null direction.
    pub null_tol: f64,
    /// Normalized second-polynomial tolerance for band-edge filtering.
    pub edge_tol: f64,
    /// Normalized residual tolerance for on-curve points.
    pub point_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            series_tol: 1e-18,
            check_tol: 1e-10,
            pole_guard: 1e-6,
            trim_tol: 1e-12,
            root_tol: 1e-8,
            interp_tol: 1e-9,
            shift_merge_tol: 1e-12,
            null_tol: 1e-7,
            edge_tol: 1e-6,
            point_tol: 1e-8,
        }
    }
}

/// Immutable global parameters: modular parameter τ, lattice spacing η,
/// integer spin ℓ, with derived constants and tolerance settings.
///
/// Construction validates convergence (Im τ > 0), that η lies in the
/// fundamental parallelogram with vertices 0, 1, τ, 1+τ, and genericity:
/// `|θ₁(2kη)|` must stay above `check_tol × scale` for k = 1..4ℓ+2 so that no
/// resonant denominator appears downstream.  All derived constants (nome,
/// half-periods, elliptic numbers and factorials) are precomputed.
#[derive(Debug, Clone)]
pub struct EllipticContext {
    /// Modular parameter, Im τ > 0.
    pub tau: C,
    /// Lattice spacing η.
    pub eta: C,
    /// Integer spin ℓ ≥ 1.
    pub ell: u32,
    /// Nome q = exp(iπτ).
    pub nome: C,
    /// Half-periods ω₁ = 0, ω₂ = 1/2, ω₃ = (1+τ)/2, ω₄ = τ/2.
    pub half_periods: [C; 4],
    /// N = ℓ(ℓ+1)/2.
    pub big_n: u32,
    /// Tolerance settings.
    pub tol: Tolerances,
    en_cache: Vec<C>,
    efac_cache: Vec<C>,
}

/// Maximum summation index of the theta series; |q|^{k²} underflows long
/// before this for any usable τ.
const THETA_KMAX: i64 = 64;

/// One symmetric block of the theta series in trigonometric form.  The two
/// exponential terms with mirrored summation index are combined analytically:
/// for the half-integer characteristics (a = 1, 2) the indices k and −k−1
/// fuse into sin/cos of (2k+1)πx, for the integer characteristics (a = 3, 4)
/// the indices ±k fuse into cos(2kπx) with k = 0 giving the constant 1.
/// This keeps the parity of each function exact in floating point: θ₁ of an
/// argument that is exactly zero evaluates to exactly zero and tiny arguments
/// keep full relative accuracy, whereas separately summed exponentials leave
/// an ~ε·q^{1/4} rounding residue that dominates values near a zero.
fn theta_block(a: u8, k: i64, x: C, tau: C) -> C {
    let ipi = c64(0.0, std::f64::consts::PI);
    let kf = k as f64;
    let pix = x * std::f64::consts::PI;
    let alt = if k % 2 == 0 { 2.0 } else { -2.0 };
    match a {
        1 => alt * (ipi * tau * (kf + 0.5) * (kf + 0.5)).exp() * ((2.0 * kf + 1.0) * pix).sin(),
        2 => 2.0 * (ipi * tau * (kf + 0.5) * (kf + 0.5)).exp() * ((2.0 * kf + 1.0) * pix).cos(),
        3 if k == 0 => c64(1.0, 0.0),
        3 => 2.0 * (ipi * tau * kf * kf).exp() * (2.0 * kf * pix).cos(),
        4 if k == 0 => c64(1.0, 0.0),
        4 => alt * (ipi * tau * kf * kf).exp() * (2.0 * kf * pix).cos(),
        _ => unreachable!("theta index validated by caller"),
    }
}

/// Raw theta series with symmetric truncation: mirrored index pairs are added
/// as single trigonometric blocks outward from k = 0 and summation stops once
/// a block falls below `series_tol` times the largest block seen so far.
pub fn theta_series(a: u8, x: C, tau: C, series_tol: f64) -> Result<C> {
    if !(1..=4).contains(&a) {
        return Err(Error::Domain(format!("theta index {a} outside 1..4")));
    }
    if tau.im <= 0.0 {
        return Err(Error::Validation(format!(
            "theta series requires Im tau > 0, got tau = {tau}"
        )));
    }
    let mut sum = theta_block(a, 0, x, tau);
    let mut max_term = sum.norm();
    for k in 1..=THETA_KMAX {
        let tp = theta_block(a, k, x, tau);
        sum += tp;
        let pair_mag = tp.norm();
        max_term = max_term.max(pair_mag);
        // Blocks decay like |q|^{k²} once k passes the peak set by Im x, so a
        // single below-threshold block past that peak is conclusive.
        let past_peak = k as f64 * tau.im > x.im.abs() + 2.0;
        if past_peak && pair_mag < series_tol * max_term {
            break;
        }
    }
    if !sum.re.is_finite() || !sum.im.is_finite() {
        return Err(Error::Validation(format!(
            "theta series diverged at a={a}, x={x}, tau={tau}"
        )));
    }
    Ok(sum)
}

impl EllipticContext {
    /// Builds a context with default tolerances.
    pub fn new(ell: u32, eta: C, tau: C) -> Result<Self> {
        Self::with_tolerances(ell, eta, tau, Tolerances::default())
    }

    /// Builds a context with explicit tolerance settings.
    pub fn with_tolerances(ell: u32, eta: C, tau: C, tol: Tolerances) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Validation("spin ell must be >= 1".into()));
        }
        if tau.im <= 0.0 {
            return Err(Error::Validation(format!(
                "Im tau must be positive for series convergence, got {tau}"
            )));
        }
        // η = a·1 + b·τ with real a, b must lie in the fundamental
        // parallelogram spanned by 1 and τ.
        let b = eta.im / tau.im;
        let a = eta.re - b * tau.re;
        if !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) {
            return Err(Error::Validation(format!(
                "eta = {eta} falls outside the fundamental parallelogram (coords a={a:.4}, b={b:.4})"
            )));
        }
        let nome = (c64(0.0, std::f64::consts::PI) * tau).exp();
        let half_periods = [c64(0.0, 0.0), c64(0.5, 0.0), (c64(1.0, 0.0) + tau) / 2.0, tau / 2.0];
        let big_n = ell * (ell + 1) / 2;

        let cache_len = (4 * ell + 6) as usize;
        let mut en_cache = Vec::with_capacity(cache_len + 1);
        for n in 0..=cache_len {
            let v = theta_series(1, 2.0 * (n as f64) * eta, tau, tol.series_tol)?;
            en_cache.push(v);
        }
        let mut efac_cache = Vec::with_capacity(cache_len + 1);
        let mut acc = c64(1.0, 0.0);
        efac_cache.push(acc);
        for n in 1..=cache_len {
            acc *= en_cache[n];
            efac_cache.push(acc);
        }

        let ctx = EllipticContext {
            tau,
            eta,
            ell,
            nome,
            half_periods,
            big_n,
            tol,
            en_cache,
            efac_cache,
        };

        // Genericity: no resonant elliptic number for k = 1..4ℓ+2.
        let upper = 4 * ell + 2;
        let scale = (1..=upper)
            .map(|k| ctx.en(k as i64).norm())
            .fold(0.0_f64, f64::max);
        for k in 1..=upper {
            let mag = ctx.en(k as i64).norm();
            if mag <= ctx.tol.check_tol * scale {
                return Err(Error::Validation(format!(
                    "resonant eta: |theta1({k}*2eta)| = {mag:.3e} <= {:.1e} x scale {scale:.3e}",
                    ctx.tol.check_tol
                )));
            }
        }
        Ok(ctx)
    }

    /// Evaluates θ_a(x), a = 1..4, by the truncated q-series.
    pub fn theta(&self, a: u8, x: C) -> Result<C> {
        theta_series(a, x, self.tau, self.tol.series_tol)
    }

    /// Evaluates θ₁(x); infallible once the context is validated.
    #[inline]
    pub fn theta1(&self, x: C) -> C {
        theta_series(1, x, self.tau, self.tol.series_tol)
            .expect("theta1 on a validated context cannot fail")
    }

    /// Elliptic number [n] = θ₁(2nη); cached for small |n|.
    pub fn en(&self, n: i64) -> C {
        let a = n.unsigned_abs() as usize;
        let v = if a < self.en_cache.len() {
            self.en_cache[a]
        } else {
            self.theta1(2.0 * (a as f64) * self.eta)
        };
        if n < 0 {
            -v
        } else {
            v
        }
    }

    /// Elliptic number at half-integer index: [t/2] = θ₁(tη), used by the
    /// twice-spin operator layer.
    pub fn en_half(&self, twice_n: i64) -> C {
        self.theta1((twice_n as f64) * self.eta)
    }

    /// Elliptic factorial [n]! = [1][2]⋯[n]; [0]! = 1.
    pub fn efac(&self, n: i64) -> Result<C> {
        if n < 0 {
            return Err(Error::Domain(format!("elliptic factorial of negative {n}")));
        }
        let n = n as usize;
        if n < self.efac_cache.len() {
            return Ok(self.efac_cache[n]);
        }
        let mut acc = *self.efac_cache.last().expect("cache non-empty");
        for k in self.efac_cache.len()..=n {
            acc *= self.en(k as i64);
        }
        Ok(acc)
    }

    /// Elliptic binomial [n; m] = [n]!/([m]![n−m]!) computed by cancelling
    /// factors before dividing: Π_{j=1..m} [n−m+j]/[j].
    pub fn ebin(&self, n: i64, m: i64) -> Result<C> {
        if m < 0 || m > n {
            return Err(Error::Domain(format!(
                "elliptic binomial [{n}; {m}] needs 0 <= m <= n"
            )));
        }
        let mut p = c64(1.0, 0.0);
        for j in 1..=m {
            p *= self.en(n - m + j) / self.en(j);
        }
        Ok(p)
    }

    /// Distance from `x` to the zero lattice ℤ + τℤ of θ₁, measured in the
    /// complex plane after reducing the lattice coordinates.
    pub fn lattice_distance(&self, x: C) -> f64 {
        let b = x.im / self.tau.im;
        let a = x.re - b * self.tau.re;
        let da = a - a.round();
        let db = b - b.round();
        (c64(da, 0.0) + db * self.tau).norm()
    }

    /// Guards that `x` is not within `pole_guard` of a θ₁ zero.
    pub fn guard_theta1_arg(&self, x: C) -> Result<()> {
        let dist = self.lattice_distance(x);
        if dist <= self.tol.pole_guard {
            return Err(Error::Pole { arg: x, dist });
        }
        Ok(())
    }

    /// Guarded reciprocal 1/θ₁(x).
    pub fn inv_theta1(&self, x: C) -> Result<C> {
        self.guard_theta1_arg(x)?;
        Ok(c64(1.0, 0.0) / self.theta1(x))
    }

    /// The kernel Φ(x, ζ) = θ₁(ζ+x) / (θ₁(x) θ₁(ζ)).
    pub fn phi(&self, x: C, zeta: C) -> Result<C> {
        self.guard_theta1_arg(x)?;
        self.guard_theta1_arg(zeta)?;
        Ok(self.theta1(zeta + x) * (self.inv_theta1(x)? * self.inv_theta1(zeta)?))
    }

    /// Default working parameters used across the test-suites:
    /// τ = 0.1 + 1.1i, η = 0.123 + 0.057i.
    pub fn default_params(ell: u32) -> Result<Self> {
        Self::new(ell, c64(0.123, 0.057), c64(0.1, 1.1))
    }
}
