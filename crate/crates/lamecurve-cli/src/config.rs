//! Argument types shared by all subcommands: complex-literal parsing,
//! seed resolution, and tolerance overrides.

use clap::Args;
use lamecurve::{EllipticContext, Tolerances, C};
use num_complex::Complex64;
use std::path::PathBuf;

/// Parses a complex literal of the form "a+bi" / "a-bi" (also plain "a",
/// "bi", "i", "-i"); decimal floats with optional exponents, no whitespace.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let err = || format!("invalid complex literal {s:?}: expected forms like 1.5, -0.3i, 0.1+1.1i");
    let t = s.trim();
    if t.is_empty() || t != s {
        return Err(err());
    }
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        // Split real and imaginary at the last sign not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-')
                && !matches!(bytes[i - 1], b'e' | b'E')
            {
                split = Some(i);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let re: f64 = re_str.parse().map_err(|_| err())?;
        let im: f64 = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => im_str.parse().map_err(|_| err())?,
        };
        Ok(Complex64::new(re, im))
    } else {
        let re: f64 = t.parse().map_err(|_| err())?;
        Ok(Complex64::new(re, 0.0))
    }
}

/// Arguments common to every subcommand.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Integer spin ell (>= 1).
    #[arg(long)]
    pub ell: u32,

    /// Lattice spacing eta as a complex literal "a+bi".
    #[arg(long, value_parser = parse_complex, default_value = "0.123+0.057i")]
    pub eta: Complex64,

    /// Modular parameter tau as a complex literal "a+bi" (Im tau > 0).
    #[arg(long, value_parser = parse_complex, default_value = "0.1+1.1i")]
    pub tau: Complex64,

    /// RNG seed for sampled checks (falls back to LAMECURVE_SEED, then 42).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Write the report to this path instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format; csv applies to edge lists only.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(flatten)]
    pub tol: TolArgs,
}

/// Output format selector.
#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Structured JSON report (schema "lamecurve/1").
    Json,
    /// Comma-separated edge list with columns re, im, method.
    Csv,
}

/// Per-run tolerance overrides (defaults match the library).
#[derive(Args, Debug, Clone, Copy)]
pub struct TolArgs {
    /// Theta-series truncation threshold.
    #[arg(long)]
    pub series_tol: Option<f64>,
    /// Identity-residual tolerance for construction-time checks.
    #[arg(long)]
    pub check_tol: Option<f64>,
    /// Pole-guard radius around theta zeros.
    #[arg(long)]
    pub pole_guard: Option<f64>,
    /// Polynomial trailing-coefficient trim threshold.
    #[arg(long)]
    pub trim_tol: Option<f64>,
    /// Polynomial root residual tolerance.
    #[arg(long)]
    pub root_tol: Option<f64>,
    /// Interpolation fresh-point verification tolerance.
    #[arg(long)]
    pub interp_tol: Option<f64>,
    /// Shift identification tolerance in units of |eta|.
    #[arg(long)]
    pub shift_merge_tol: Option<f64>,
    /// Relative singular-value gap accepted as a null direction.
    #[arg(long)]
    pub null_tol: Option<f64>,
    /// Band-edge filtering tolerance.
    #[arg(long)]
    pub edge_tol: Option<f64>,
    /// On-curve point residual tolerance.
    #[arg(long)]
    pub point_tol: Option<f64>,
}

impl TolArgs {
    /// Applies the overrides on top of the library defaults.
    pub fn resolve(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.series_tol {
            t.series_tol = v;
        }
        if let Some(v) = self.check_tol {
            t.check_tol = v;
        }
        if let Some(v) = self.pole_guard {
            t.pole_guard = v;
        }
        if let Some(v) = self.trim_tol {
            t.trim_tol = v;
        }
        if let Some(v) = self.root_tol {
            t.root_tol = v;
        }
        if let Some(v) = self.interp_tol {
            t.interp_tol = v;
        }
        if let Some(v) = self.shift_merge_tol {
            t.shift_merge_tol = v;
        }
        if let Some(v) = self.null_tol {
            t.null_tol = v;
        }
        if let Some(v) = self.edge_tol {
            t.edge_tol = v;
        }
        if let Some(v) = self.point_tol {
            t.point_tol = v;
        }
        t
    }
}

impl CommonArgs {
    /// Resolves the seed: flag, then LAMECURVE_SEED, then 42.
    pub fn resolve_seed(&self) -> Result<u64, String> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var("LAMECURVE_SEED") {
            Ok(v) => v
                .parse()
                .map_err(|_| format!("LAMECURVE_SEED must be an unsigned integer, got {v:?}")),
            Err(_) => Ok(42),
        }
    }

    /// Validates the parameters and builds the elliptic context.
    pub fn build_context(&self) -> lamecurve::Result<EllipticContext> {
        let eta: C = self.eta;
        let tau: C = self.tau;
        EllipticContext::with_tolerances(self.ell, eta, tau, self.tol.resolve())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_complex("-2").unwrap(), Complex64::new(-2.0, 0.0));
        assert_eq!(parse_complex("0.1+1.1i").unwrap(), Complex64::new(0.1, 1.1));
        assert_eq!(parse_complex("0.1-1.1i").unwrap(), Complex64::new(0.1, -1.1));
        assert_eq!(parse_complex("-0.3i").unwrap(), Complex64::new(0.0, -0.3));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e-4i").unwrap(), Complex64::new(1e-3, 2e-4));
        assert_eq!(parse_complex("1E-3-2E-4i").unwrap(), Complex64::new(1e-3, -2e-4));
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", " 1+2i", "1 + 2i", "abc", "1+2j", "1++2i", "2i+1", "--3"] {
            assert!(parse_complex(bad).is_err(), "{bad:?} should fail");
        }
    }
}
