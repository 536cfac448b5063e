//! Subcommand implementations: each builds check rows through the library
//! and assembles a report document.

use crate::config::CommonArgs;
use crate::report::{cpx, cpx_list, ConfigEcho, ReportDocument};
use lamecurve::curve::{
    band_edges_bloch, band_edges_hyper, curve_coeffs, fibre_over_zeta, hyperelliptic,
    multiset_match,
};
use lamecurve::polyalg::PolynomialC;
use lamecurve::verify::{run_suite, CheckRow, Suite};
use lamecurve::{C, EllipticContext, Result};
use serde_json::{json, Value};

/// Result of one subcommand: the document plus raw edge sets when the
/// command produces edge lists (used for CSV rendering).
pub struct CommandOutput {
    pub doc: ReportDocument,
    pub edges: Option<Vec<(String, Vec<C>)>>,
}

fn echo(args: &CommonArgs, seed: u64) -> ConfigEcho {
    ConfigEcho {
        ell: args.ell,
        eta: [args.eta.re, args.eta.im],
        tau: [args.tau.re, args.tau.im],
        seed,
        zeta: None,
        method: None,
        suite: None,
    }
}

fn poly_coeffs(p: &PolynomialC) -> Vec<C> {
    match p.degree() {
        None => vec![],
        Some(d) => (0..=d).map(|i| p.coeff(i)).collect(),
    }
}

/// `coeffs`: covering-form coefficients C_0..C_N with the palindrome check.
pub fn cmd_coeffs(ctx: &EllipticContext, args: &CommonArgs, seed: u64) -> Result<CommandOutput> {
    let coeffs = curve_coeffs(ctx)?;
    let n = coeffs.len() - 1;
    let cmax = coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut palin = 0.0_f64;
    for j in 0..=n {
        palin = palin.max((coeffs[j] - coeffs[n - j]).norm() / cmax);
    }
    let checks = vec![CheckRow::new("coeff_palindrome", palin, 1e-10)];
    let payload = json!({
        "n": n,
        "coefficients": cpx_list(&coeffs),
    });
    Ok(CommandOutput {
        doc: ReportDocument::new("coeffs", echo(args, seed), &checks, payload),
        edges: None,
    })
}

/// Edge route selector for `edges`.
#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMethod {
    /// Band edges from the Bloch-route polynomial system.
    Bloch,
    /// Band edges from the hyperelliptic polynomial roots.
    Hyper,
    /// Both routes plus the cross-route matching report.
    Both,
}

impl EdgeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeMethod::Bloch => "bloch",
            EdgeMethod::Hyper => "hyper",
            EdgeMethod::Both => "both",
        }
    }
}

/// `edges`: band-edge multiset(s), negation symmetry, and (for `both`)
/// the cross-route discrepancy.
pub fn cmd_edges(
    ctx: &EllipticContext,
    args: &CommonArgs,
    seed: u64,
    method: EdgeMethod,
) -> Result<CommandOutput> {
    let mut checks = Vec::new();
    let mut payload = serde_json::Map::new();
    let mut sets: Vec<(String, Vec<C>)> = Vec::new();
    let negation = |edges: &[C]| -> f64 {
        let neg: Vec<C> = edges.iter().map(|e| -e).collect();
        multiset_match(edges, &neg).unwrap_or(f64::INFINITY)
    };
    let mut bloch = None;
    let mut hyper = None;
    if method != EdgeMethod::Hyper {
        let e = band_edges_bloch(ctx)?;
        checks.push(CheckRow::new("edges_bloch_negation_symmetry", negation(&e), 0.0));
        payload.insert("edges_bloch".into(), cpx_list(&e));
        sets.push(("bloch".into(), e.clone()));
        bloch = Some(e);
    }
    if method != EdgeMethod::Bloch {
        let e = band_edges_hyper(ctx)?;
        checks.push(CheckRow::new("edges_hyper_negation_symmetry", negation(&e), 0.0));
        payload.insert("edges_hyper".into(), cpx_list(&e));
        sets.push(("hyper".into(), e.clone()));
        hyper = Some(e);
    }
    if let (Some(b), Some(h)) = (&bloch, &hyper) {
        let disc = multiset_match(b, h).unwrap_or(f64::INFINITY);
        checks.push(CheckRow::new("edges_cross_route", disc, 1e-5));
        payload.insert("cross_route_discrepancy".into(), json!(disc));
    }
    let count = bloch.as_ref().or(hyper.as_ref()).map_or(0, |e| e.len());
    payload.insert("count".into(), json!(count));
    let mut cfg = echo(args, seed);
    cfg.method = Some(method.name().to_string());
    Ok(CommandOutput {
        doc: ReportDocument::new("edges", cfg, &checks, Value::Object(payload)),
        edges: Some(sets),
    })
}

/// `hyper`: hyperelliptic-form data D_{2ℓ}, T_{2ℓ+1}(0,·), P_{2ℓ+1} with
/// parity and degree checks.
pub fn cmd_hyper(ctx: &EllipticContext, args: &CommonArgs, seed: u64) -> Result<CommandOutput> {
    let hyper = hyperelliptic(ctx)?;
    let ell = ctx.ell as i64;
    let checks = vec![
        CheckRow::new("t_top_parity", hyper.t_top.parity_residual(1), 1e-10),
        CheckRow::new("d_parity", hyper.d.parity_residual(0), 1e-12),
        CheckRow::new(
            "p_degree",
            hyper
                .p
                .degree()
                .map_or(f64::INFINITY, |d| (d as f64 - (2 * ell + 1) as f64).abs()),
            0.0,
        ),
        CheckRow::new(
            "p_monic",
            (hyper.p.coeff(hyper.p.degree().unwrap_or(0)) - C::new(1.0, 0.0)).norm(),
            // Exact 1 in exact arithmetic; the assembled coefficients carry
            // interpolation rounding of order 1e-12, so gate above the noise.
            1e-10,
        ),
    ];
    let payload = json!({
        "t_top": cpx_list(&poly_coeffs(&hyper.t_top)),
        "d": cpx_list(&poly_coeffs(&hyper.d)),
        "p": cpx_list(&poly_coeffs(&hyper.p)),
    });
    Ok(CommandOutput {
        doc: ReportDocument::new("hyper", echo(args, seed), &checks, payload),
        edges: None,
    })
}

/// `bloch`: the fibre over ζ with per-point spectral data and the worst
/// residual of each on-curve consistency check.
pub fn cmd_bloch(
    ctx: &EllipticContext,
    args: &CommonArgs,
    seed: u64,
    zeta: C,
) -> Result<CommandOutput> {
    let sols = fibre_over_zeta(ctx, zeta)?;
    let expected = 2 * ctx.big_n as usize;
    let mut r_curve = 0.0_f64;
    let mut r_eigen = 0.0_f64;
    let mut r_glue = 0.0_f64;
    let mut points = Vec::new();
    for sol in &sols {
        let (a, b) = lamecurve::curve::curve_residuals(ctx, &sol.point)?;
        r_curve = r_curve.max(a).max(b);
        r_eigen = r_eigen.max(sol.eigen_residual);
        r_glue = r_glue.max(sol.glue_residual);
        points.push(json!({
            "k": cpx(sol.point.k),
            "e": cpx(sol.point.e),
            "s": cpx_list(&sol.s),
        }));
    }
    let checks = vec![
        CheckRow::new(
            "fibre_size",
            (sols.len() as f64 - expected as f64).abs(),
            0.0,
        ),
        CheckRow::new("curve_relations", r_curve, 1e-7),
        CheckRow::new("eigen_equation", r_eigen, 1e-7),
        CheckRow::new("glueing", r_glue, 1e-7),
    ];
    let payload = json!({
        "zeta": cpx(zeta),
        "points": points,
    });
    let mut cfg = echo(args, seed);
    cfg.zeta = Some([zeta.re, zeta.im]);
    Ok(CommandOutput {
        doc: ReportDocument::new("bloch", cfg, &checks, payload),
        edges: None,
    })
}

/// Suite selector for `verify`.
#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteArg {
    Algebra,
    Transfer,
    Curve,
    Lax,
    All,
}

impl SuiteArg {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteArg::Algebra => "algebra",
            SuiteArg::Transfer => "transfer",
            SuiteArg::Curve => "curve",
            SuiteArg::Lax => "lax",
            SuiteArg::All => "all",
        }
    }

    fn suites(&self) -> Vec<Suite> {
        match self {
            SuiteArg::Algebra => vec![Suite::Algebra],
            SuiteArg::Transfer => vec![Suite::Transfer],
            SuiteArg::Curve => vec![Suite::Curve],
            SuiteArg::Lax => vec![Suite::Lax],
            SuiteArg::All => Suite::all().to_vec(),
        }
    }
}

/// `verify`: runs the selected suites and reports every row.
pub fn cmd_verify(
    ctx: &EllipticContext,
    args: &CommonArgs,
    seed: u64,
    suite: SuiteArg,
) -> Result<CommandOutput> {
    let mut checks = Vec::new();
    let mut names = Vec::new();
    for s in suite.suites() {
        let rows = run_suite(ctx, s, seed)?;
        for r in rows {
            checks.push(CheckRow::new(
                format!("{}/{}", s.name(), r.name),
                r.residual,
                r.threshold,
            ));
        }
        names.push(s.name());
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    let payload = json!({
        "suites": names,
        "rows": checks.len(),
        "passed": passed,
    });
    let mut cfg = echo(args, seed);
    cfg.suite = Some(suite.name().to_string());
    Ok(CommandOutput {
        doc: ReportDocument::new("verify", cfg, &checks, payload),
        edges: None,
    })
}
