//! The structured report document every subcommand emits.

use lamecurve::verify::CheckRow;
use lamecurve::C;
use serde::Serialize;
use serde_json::{json, Value};

/// Schema tag for the JSON output.
pub const SCHEMA: &str = "lamecurve/1";

/// Complex number as a `[re, im]` pair.
pub fn cpx(z: C) -> Value {
    json!([z.re, z.im])
}

/// Complex slice as an array of `[re, im]` pairs.
pub fn cpx_list(zs: &[C]) -> Value {
    Value::Array(zs.iter().map(|&z| cpx(z)).collect())
}

/// One verification row in the document.
#[derive(Serialize, Debug, Clone)]
pub struct CheckOut {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl From<&CheckRow> for CheckOut {
    fn from(r: &CheckRow) -> Self {
        CheckOut {
            name: r.name.clone(),
            residual: r.residual,
            threshold: r.threshold,
            pass: r.pass,
        }
    }
}

/// Echo of the effective run configuration.
#[derive(Serialize, Debug, Clone)]
pub struct ConfigEcho {
    pub ell: u32,
    pub eta: [f64; 2],
    pub tau: [f64; 2],
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
}

/// Top-level report: schema tag, config echo, check table, payload.
#[derive(Serialize, Debug, Clone)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub command: String,
    pub config: ConfigEcho,
    pub checks: Vec<CheckOut>,
    pub payload: Value,
    pub versions: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl ReportDocument {
    /// Assembles a report for one command.
    pub fn new(command: &str, config: ConfigEcho, checks: &[CheckRow], payload: Value) -> Self {
        ReportDocument {
            schema: SCHEMA,
            command: command.to_string(),
            config,
            checks: checks.iter().map(CheckOut::from).collect(),
            payload,
            versions: json!({ "cli": env!("CARGO_PKG_VERSION") }),
            timing_ms: None,
        }
    }

    /// Whether every check row passed.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Pretty JSON with a trailing newline (deterministic for fixed input).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Renders edge lists as CSV with columns re, im, method.
pub fn edges_csv(sets: &[(&str, &[C])]) -> String {
    let mut out = String::from("re,im,method\n");
    for (method, edges) in sets {
        for e in *edges {
            out.push_str(&format!("{:?},{:?},{}\n", e.re, e.im, method));
        }
    }
    out
}
