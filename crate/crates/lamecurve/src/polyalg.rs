//! Dense complex polynomials in one variable, determinants of (bordered)
//! tridiagonal matrices with polynomial diagonals, trigonometric
//! interpolation, and companion-matrix root extraction.
//!
//! Polynomials are stored with ascending coefficients (`coeffs[k]` multiplies
//! `x^k`); the zero polynomial is the empty vector.  Numerical trimming drops
//! trailing coefficients smaller than `trim_tol` times the largest
//! coefficient magnitude.

use crate::error::{Error, Result};
use crate::theta::{c64, C};
use nalgebra::DMatrix;

/// Dense polynomial with complex coefficients, ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialC {
    /// `coeffs[k]` is the coefficient of `x^k`; empty means identically zero.
    pub coeffs: Vec<C>,
}

impl PolynomialC {
    /// Builds a polynomial from ascending coefficients, dropping trailing
    /// exact zeros.
    pub fn new(coeffs: Vec<C>) -> Self {
        let mut p = PolynomialC { coeffs };
        while let Some(last) = p.coeffs.last() {
            if last.norm() == 0.0 {
                p.coeffs.pop();
            } else {
                break;
            }
        }
        p
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        PolynomialC { coeffs: Vec::new() }
    }

    /// The constant polynomial `c`.
    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c·x^k`.
    pub fn monomial(c: C, k: usize) -> Self {
        let mut v = vec![c64(0.0, 0.0); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Coefficient of `x^k` (zero beyond the stored length).
    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).copied().unwrap_or(c64(0.0, 0.0))
    }

    /// Largest coefficient magnitude (zero for the zero polynomial).
    pub fn max_mag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation at `x`.
    pub fn eval(&self, x: C) -> C {
        let mut acc = c64(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &PolynomialC) -> PolynomialC {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut v = Vec::with_capacity(n);
        for k in 0..n {
            v.push(self.coeff(k) + other.coeff(k));
        }
        Self::new(v)
    }

    /// Difference of two polynomials.
    pub fn sub(&self, other: &PolynomialC) -> PolynomialC {
        self.add(&other.scale(c64(-1.0, 0.0)))
    }

    /// Product of two polynomials (dense convolution).
    pub fn mul(&self, other: &PolynomialC) -> PolynomialC {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut v = vec![c64(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Self::new(v)
    }

    /// Scalar multiple.
    pub fn scale(&self, s: C) -> PolynomialC {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Formal derivative.
    pub fn derivative(&self) -> PolynomialC {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, &c)| c * ((k + 1) as f64))
                .collect(),
        )
    }

    /// Drops trailing coefficients of magnitude at most `trim_tol` times the
    /// largest coefficient magnitude.
    pub fn trimmed(&self, trim_tol: f64) -> PolynomialC {
        let cut = trim_tol * self.max_mag();
        let mut v = self.coeffs.clone();
        while let Some(last) = v.last() {
            if last.norm() <= cut {
                v.pop();
            } else {
                break;
            }
        }
        PolynomialC { coeffs: v }
    }

    /// Largest coefficient-wise difference relative to the larger of the two
    /// coefficient scales.
    pub fn rel_diff(&self, other: &PolynomialC) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut num = 0.0_f64;
        for k in 0..n {
            num = num.max((self.coeff(k) - other.coeff(k)).norm());
        }
        let den = self.max_mag().max(other.max_mag());
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Largest magnitude among coefficients whose index has parity different
    /// from `parity` (0 = even, 1 = odd), relative to the overall coefficient
    /// scale.  Zero for the zero polynomial.
    pub fn parity_residual(&self, parity: usize) -> f64 {
        let den = self.max_mag();
        if den == 0.0 {
            return 0.0;
        }
        let mut num = 0.0_f64;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k % 2 != parity {
                num = num.max(c.norm());
            }
        }
        num / den
    }

    /// Keeps every second coefficient starting from index `parity`,
    /// reinterpreting the polynomial in the squared variable: for an even
    /// polynomial `p(x) = Σ a_{2k} x^{2k}` this returns `Σ a_{2k} y^k`.
    pub fn compress_parity(&self, parity: usize) -> PolynomialC {
        let v = self
            .coeffs
            .iter()
            .skip(parity)
            .step_by(2)
            .copied()
            .collect();
        Self::new(v)
    }
}

/// Tridiagonal matrix with polynomial diagonal entries, constant off-diagonal
/// entries, and an optional replaced last row (a "bordered" matrix).
///
/// With `n = diag.len()`:
/// - entry (i, i) is `diag[i]` (a polynomial in the spectral variable),
/// - entry (i, i+1) is `sup[i]`, entry (i+1, i) is `sub[i]`,
/// - if `last_row = Some(r)`, the off-diagonal entries of row n−1 are replaced
///   by `r[j]` at column j = 0..n−2 (the diagonal entry stays `diag[n−1]` and
///   `sub[n−2]` is ignored).
#[derive(Debug, Clone)]
pub struct TridiagBordered {
    /// Polynomial diagonal, one entry per row.
    pub diag: Vec<PolynomialC>,
    /// Subdiagonal constants, `sub[i]` at entry (i+1, i).
    pub sub: Vec<C>,
    /// Superdiagonal constants, `sup[i]` at entry (i, i+1).
    pub sup: Vec<C>,
    /// Replacement for the off-diagonal part of the final row.
    pub last_row: Option<Vec<C>>,
}

impl TridiagBordered {
    fn validate(&self) -> Result<usize> {
        let n = self.diag.len();
        if n == 0 {
            return Err(Error::Validation("empty tridiagonal matrix".into()));
        }
        if self.sub.len() + 1 != n || self.sup.len() + 1 != n {
            return Err(Error::Validation(format!(
                "tridiagonal bands have lengths sub={}, sup={}, expected {}",
                self.sub.len(),
                self.sup.len(),
                n - 1
            )));
        }
        if let Some(r) = &self.last_row {
            if r.len() + 1 != n {
                return Err(Error::Validation(format!(
                    "bordered last row has length {}, expected {}",
                    r.len(),
                    n - 1
                )));
            }
        }
        Ok(n)
    }

    /// Determinant as a polynomial in the spectral variable, via the
    /// three-term continuant recurrence
    ///
    /// ```text
    /// D_0 = 1,  D_1 = diag_1,  D_k = diag_k D_{k−1} − sub_{k−1} sup_{k−1} D_{k−2},
    /// ```
    ///
    /// and, when the last row is replaced by (r_1, …, r_{n−1}, diag_n),
    /// cofactor expansion along it:
    ///
    /// ```text
    /// det = diag_n D_{n−1} + Σ_{j=1}^{n−1} (−1)^{n+j} r_j D_{j−1} Π_{i=j}^{n−1} sup_i.
    /// ```
    pub fn det(&self) -> Result<PolynomialC> {
        let n = self.validate()?;
        // Leading principal minors D_0..D_{n-1}; D_n only needed when the
        // last row is untouched.
        let mut minors: Vec<PolynomialC> = Vec::with_capacity(n + 1);
        minors.push(PolynomialC::constant(c64(1.0, 0.0)));
        minors.push(self.diag[0].clone());
        for k in 2..=n {
            // When the last row is replaced, the plain recurrence for D_n
            // would use sub[n-2], which no longer exists in the matrix; stop
            // at D_{n-1} in that case.
            if k == n && self.last_row.is_some() {
                break;
            }
            let t1 = self.diag[k - 1].mul(&minors[k - 1]);
            let t2 = minors[k - 2].scale(self.sub[k - 2] * self.sup[k - 2]);
            minors.push(t1.sub(&t2));
        }
        match &self.last_row {
            None => Ok(minors[n].clone()),
            Some(r) => {
                let mut det = self.diag[n - 1].mul(&minors[n - 1]);
                // Running product Π_{i=j}^{n-2} sup_i of superdiagonal
                // entries, built from the right.
                let mut sup_prod = c64(1.0, 0.0);
                for j in (1..n).rev() {
                    sup_prod *= self.sup[j - 1];
                    let sign = if (n + j) % 2 == 0 { 1.0 } else { -1.0 };
                    det = det.add(&minors[j - 1].scale(r[j - 1] * sup_prod * sign));
                }
                Ok(det)
            }
        }
    }

    /// Dense realization at a concrete value `e` of the spectral variable
    /// (used by cross-checks against generic dense determinants).
    pub fn to_dense(&self, e: C) -> Result<DMatrix<C>> {
        let n = self.validate()?;
        let mut m = DMatrix::from_element(n, n, c64(0.0, 0.0));
        for i in 0..n {
            m[(i, i)] = self.diag[i].eval(e);
        }
        for i in 0..n - 1 {
            m[(i, i + 1)] = self.sup[i];
            m[(i + 1, i)] = self.sub[i];
        }
        if let Some(r) = &self.last_row {
            for j in 0..n - 1 {
                m[(n - 1, j)] = r[j];
            }
        }
        Ok(m)
    }
}

/// Recovers a polynomial of degree at most `deg` from a black-box function by
/// sampling on the circle of radius `radius` at the (deg+1)-st roots of unity
/// and inverting the discrete Fourier transform.  The result is verified at
/// three fresh points; disagreement beyond `interp_tol` (relative to the
/// sample scale) means the function was not a polynomial of the claimed
/// degree and raises `DegreeMismatch`.
pub fn extract_poly<F>(mut f: F, deg: usize, radius: f64, interp_tol: f64) -> Result<PolynomialC>
where
    F: FnMut(C) -> Result<C>,
{
    if radius <= 0.0 {
        return Err(Error::Validation(format!(
            "interpolation radius must be positive, got {radius}"
        )));
    }
    let m = deg + 1;
    let tau = 2.0 * std::f64::consts::PI;
    let mut samples = Vec::with_capacity(m);
    let mut scale = 1.0_f64;
    for j in 0..m {
        let ang = tau * (j as f64) / (m as f64);
        let x = radius * c64(ang.cos(), ang.sin());
        let v = f(x)?;
        scale = scale.max(v.norm());
        samples.push(v);
    }
    let mut coeffs = Vec::with_capacity(m);
    for k in 0..m {
        let mut acc = c64(0.0, 0.0);
        for (j, &v) in samples.iter().enumerate() {
            let ang = -tau * ((j * k) as f64) / (m as f64);
            acc += v * c64(ang.cos(), ang.sin());
        }
        coeffs.push(acc / (m as f64) / radius.powi(k as i32));
    }
    let p = PolynomialC::new(coeffs);
    // Fresh points off the sampling grid, at three different radii.
    for (rmul, frac) in [(0.7313, 0.137), (1.1731, 0.419), (1.5291, 0.823)] {
        let ang = tau * frac + tau / (2.0 * m as f64);
        let x = radius * rmul * c64(ang.cos(), ang.sin());
        let v = f(x)?;
        let err = (v - p.eval(x)).norm();
        let local = scale.max(v.norm());
        if err > interp_tol * local {
            return Err(Error::DegreeMismatch(format!(
                "function is not a polynomial of degree <= {deg}: fresh-point residual {err:.3e} \
                 against scale {local:.3e}"
            )));
        }
    }
    Ok(p)
}

/// Roots of a (trimmed) polynomial via the eigenvalues of its companion
/// matrix, followed by two Newton polishing steps.  Each root is verified to
/// satisfy `|p(r)| <= root_tol × max|coeff| × max(1, |r|)^deg`.
pub fn poly_roots(p: &PolynomialC, root_tol: f64) -> Result<Vec<C>> {
    let deg = match p.degree() {
        None => return Err(Error::Domain("roots of the zero polynomial".into())),
        Some(0) => return Ok(Vec::new()),
        Some(d) => d,
    };
    let lead = p.coeffs[deg];
    let mut m = DMatrix::from_element(deg, deg, c64(0.0, 0.0));
    for i in 1..deg {
        m[(i, i - 1)] = c64(1.0, 0.0);
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -p.coeffs[i] / lead;
    }
    let schur = m.schur();
    let eig = schur.eigenvalues().ok_or_else(|| {
        Error::NumericalLimit("companion-matrix Schur iteration did not converge".into())
    })?;
    let dp = p.derivative();
    let scale = p.max_mag();
    let mut roots = Vec::with_capacity(deg);
    for &e in eig.iter() {
        let mut r = e;
        for _ in 0..2 {
            let d = dp.eval(r);
            if d.norm() < 1e-300 {
                break;
            }
            let step = p.eval(r) / d;
            let cand = r - step;
            if p.eval(cand).norm() <= p.eval(r).norm() {
                r = cand;
            } else {
                break;
            }
        }
        let bound = root_tol * scale * r.norm().max(1.0).powi(deg as i32);
        let resid = p.eval(r).norm();
        if resid > bound {
            return Err(Error::Consistency(format!(
                "companion root {r} has residual {resid:.3e} above bound {bound:.3e}"
            )));
        }
        roots.push(r);
    }
    Ok(roots)
}
