//! `lamecurve` — spectral-curve toolkit for the difference Lamé operator.
//!
//! Exit codes: 0 all checks pass, 1 invalid input, 2 numerical or
//! consistency failure.

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand};
use commands::{CommandOutput, EdgeMethod, SuiteArg};
use config::{parse_complex, CommonArgs, Format};
use lamecurve::Error;
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(
    name = "lamecurve",
    version,
    about = "Construct, evaluate, and cross-validate the spectral curve of the difference Lam\u{e9} operator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Covering-form curve coefficients C_0..C_N.
    Coeffs {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Band edges from the Bloch route, the hyperelliptic route, or both.
    Edges {
        #[command(flatten)]
        common: CommonArgs,
        /// Edge-computation route.
        #[arg(long, value_enum, default_value_t = EdgeMethod::Both)]
        method: EdgeMethod,
    },
    /// Hyperelliptic-form data: D, T_top, and the band-edge polynomial P.
    Hyper {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bloch eigenfunction fibre over a point zeta of the base curve.
    Bloch {
        #[command(flatten)]
        common: CommonArgs,
        /// Base-curve coordinate as a complex literal "a+bi".
        #[arg(long, value_parser = parse_complex)]
        zeta: Complex64,
    },
    /// Run the named verification suite (or all of them).
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Which suite to run.
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

impl Cmd {
    fn common(&self) -> &CommonArgs {
        match self {
            Cmd::Coeffs { common }
            | Cmd::Edges { common, .. }
            | Cmd::Hyper { common }
            | Cmd::Bloch { common, .. }
            | Cmd::Verify { common, .. } => common,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}

fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Domain(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> i32 {
    let common = cli.cmd.common();
    let seed = match common.resolve_seed() {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let ctx = match common.build_context() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit_code(&e);
        }
    };
    let result = match &cli.cmd {
        Cmd::Coeffs { common } => commands::cmd_coeffs(&ctx, common, seed),
        Cmd::Edges { common, method } => commands::cmd_edges(&ctx, common, seed, *method),
        Cmd::Hyper { common } => commands::cmd_hyper(&ctx, common, seed),
        Cmd::Bloch { common, zeta } => commands::cmd_bloch(&ctx, common, seed, *zeta),
        Cmd::Verify { common, suite } => commands::cmd_verify(&ctx, common, seed, *suite),
    };
    let out: CommandOutput = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return error_exit_code(&e);
        }
    };
    let rendered = match common.format {
        Format::Json => out.doc.to_json(),
        Format::Csv => match &out.edges {
            Some(sets) => {
                let refs: Vec<(&str, &[Complex64])> =
                    sets.iter().map(|(m, e)| (m.as_str(), e.as_slice())).collect();
                report::edges_csv(&refs)
            }
            None => {
                eprintln!("error: csv format applies to edge lists only (use the edges command)");
                return 1;
            }
        },
    };
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{rendered}"),
    }
    if out.doc.all_pass() {
        0
    } else {
        2
    }
}
