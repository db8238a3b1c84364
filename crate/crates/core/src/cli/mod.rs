//! Scenario-driven front end: expression and scenario parsing, the five
//! commands, and deterministic JSON/text reports.

pub mod catalog;
pub mod expr;
pub mod scenario;

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::coefficients::HLaurent;
use crate::error::{Error, Result};
use crate::fedosov::FedosovConnection;
use crate::ffs::{average, psi, psi_capacity, FfsCocycle};
use crate::index::verify_with;
use crate::weyl_forms::GradedElement;

pub use scenario::{Scenario, ScenarioDoc};

pub const TOOL: &str = "fedosov-index";

/// Scenario files shipped with the crate, embedded for `selftest`.
pub const FIXTURES: &[(&str, &str)] = &[
    ("flat-r2", include_str!("../../fixtures/flat-r2.json")),
    ("flat-r4", include_str!("../../fixtures/flat-r4.json")),
    ("torus-constant", include_str!("../../fixtures/torus-constant.json")),
    ("torus-trig", include_str!("../../fixtures/torus-trig.json")),
    ("torus-gauge-bundle", include_str!("../../fixtures/torus-gauge-bundle.json")),
    ("poly-gauge", include_str!("../../fixtures/poly-gauge.json")),
];

/// Fixtures that only run with `--slow`.
pub const SLOW_FIXTURES: &[&str] = &["flat-r4"];

pub fn fixture(name: &str) -> Result<ScenarioDoc> {
    let (_, text) = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Scenario(format!("no fixture named {name:?}")))?;
    ScenarioDoc::from_json(text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckRow {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// Machine-readable result of one command. Contains no timings, so a rerun
/// reproduces it byte for byte.
#[derive(Clone, Debug, Serialize)]
pub struct ReportDoc {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioDoc>,
    pub settings: Value,
    pub results: Value,
    pub checks: Vec<CheckRow>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl ReportDoc {
    fn new(command: &str, scenario: Option<&Scenario>) -> Self {
        let settings = match scenario {
            Some(s) => json!({
                "k_min": s.policy.hbar_min,
                "k_max": s.policy.hbar_max,
                "D": s.policy.max_filtration,
            }),
            None => json!({}),
        };
        Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            scenario: scenario.map(|s| s.doc.clone()),
            settings,
            results: json!({}),
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    fn push(&mut self, row: CheckRow) {
        self.pass &= row.pass;
        self.checks.push(row);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable summary: results, then one PASS/FAIL line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = self.scenario.as_ref().map_or(String::new(), |s| format!(" [{}]", s.name));
        out.push_str(&format!("{} {}{}\n", TOOL, self.command, name));
        if let Value::Object(m) = &self.results {
            for (k, v) in m {
                match v {
                    Value::Array(lines) if lines.iter().all(Value::is_string) => {
                        out.push_str(&format!("{k}:\n"));
                        for l in lines {
                            out.push_str(&format!("  {}\n", l.as_str().unwrap_or_default()));
                        }
                    }
                    Value::String(s) => out.push_str(&format!("{k}: {s}\n")),
                    // structured data lives in the JSON report
                    Value::Object(_) | Value::Array(_) => {}
                    other => out.push_str(&format!("{k}: {other}\n")),
                }
            }
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        for c in &self.checks {
            out.push_str(&format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        out.push_str(if self.pass { "overall: PASS\n" } else { "overall: FAIL\n" });
        out
    }
}

/// Flags shared by the scenario commands.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub hbar_order: Option<i32>,
    pub slow: bool,
}

fn lines(e: &GradedElement) -> Value {
    Value::Array(e.render().lines().map(|l| Value::String(l.to_string())).collect())
}

fn laurent_json(h: &HLaurent) -> Value {
    let terms: Vec<Value> = h.terms().map(|(k, c)| json!({ "hbar": k, "coeff": c.to_string() })).collect();
    json!({ "known_through": h.k_max, "terms": terms })
}

fn order(sc: &Scenario, opts: &RunOptions) -> i32 {
    opts.hbar_order.unwrap_or(sc.doc.order)
}

/// a⋆b = σ(λ(a)∘λ(b)) through ħ^order.
pub fn cmd_star(sc: &Scenario, a: &str, b: &str, opts: &RunOptions) -> Result<ReportDoc> {
    let g = &sc.geometry;
    let (dim, n) = (g.dim(), g.matrix_size());
    let ea = expr::parse_endomorphism(a, g.ring(), dim, n).map_err(|e| tag("a", e))?;
    let eb = expr::parse_endomorphism(b, g.ring(), dim, n).map_err(|e| tag("b", e))?;
    let k = order(sc, opts);
    let conn = FedosovConnection::build(g, sc.policy)?;
    let ab = conn.star(&ea, &eb, k)?;
    let ba = conn.star(&eb, &ea, k)?;
    let mut r = ReportDoc::new("star", Some(sc));
    r.results = json!({
        "a": a,
        "b": b,
        "through_hbar_order": k,
        "a_star_b": lines(&ab),
        "commutator": lines(&ab.sub(&ba)),
        "a_star_b_terms": ab.to_repr(),
    });
    Ok(r)
}

/// Builds the connection and reports every post-condition.
pub fn cmd_connection(sc: &Scenario, _opts: &RunOptions) -> Result<ReportDoc> {
    let conn = FedosovConnection::build(&sc.geometry, sc.policy)?;
    let c = conn.check();
    let mut r = ReportDoc::new("connection", Some(sc));
    let known = |p: Option<i32>| p.map_or("exact".to_string(), |p| format!("below filtration {p}"));
    r.push(CheckRow::new("curvature", c.curvature, format!("C^W = −ω + Ω_ħ, known {}", known(c.curvature_known_below))));
    r.push(CheckRow::new("central", c.central, "C^W is y-free and scalar"));
    r.push(CheckRow::new("normalized", c.normalized, "δ⁻¹r = 0"));
    r.push(CheckRow::new("r-shape", c.r_shape, "r is a one-form of filtration ≥ 2"));
    r.push(CheckRow::new("nilpotent", c.nilpotent, format!("D∘D = 0 on generators, known {}", known(c.nilpotent_known_below))));
    r.results = json!({
        "r_is_zero": conn.r().is_zero(),
        "r_term_count": conn.r().len(),
        "r": lines(conn.r()),
        "curvature": lines(conn.curvature()),
    });
    Ok(r)
}

/// Ψ_D(a), plus the torus average on Fourier charts.
pub fn cmd_trace_density(sc: &Scenario, a: &str, opts: &RunOptions) -> Result<ReportDoc> {
    let g = &sc.geometry;
    let ea = expr::parse_endomorphism(a, g.ring(), g.dim(), g.matrix_size()).map_err(|e| tag("a", e))?;
    let conn = FedosovConnection::build(g, sc.policy)?;
    let cocycle = FfsCocycle::new(g.frame())?;
    let mut r = ReportDoc::new("trace-density", Some(sc));
    let want = order(sc, opts);
    let cap = psi_capacity(&conn, &ea).unwrap_or(want);
    let k = want.min(cap);
    for j in (k + 1)..=want {
        r.notes.push(format!("undetermined at order {j} (raise --filtration above {})", sc.policy.max_filtration));
    }
    let p = psi(&cocycle, &conn, &ea, k)?;
    let mut results = json!({ "a": a, "through_hbar_order": k, "psi": lines(&p) });
    if g.ring().is_fourier() {
        results["average"] = laurent_json(&average(&p)?);
    }
    r.results = results;
    Ok(r)
}

/// Both sides of the index theorem, order by order.
pub fn cmd_index_check(sc: &Scenario, opts: &RunOptions) -> Result<ReportDoc> {
    let q = sc.q.as_ref().ok_or_else(|| Error::Scenario("index-check needs an idempotent".into()))?;
    let conn = FedosovConnection::build(&sc.geometry, sc.policy)?;
    let cocycle = FfsCocycle::new(sc.geometry.frame())?;
    let report = verify_with(&conn, &cocycle, q, order(sc, opts))?;
    let mut r = ReportDoc::new("index-check", Some(sc));
    for o in &report.orders {
        let show = |s: &Option<String>| s.clone().unwrap_or_else(|| "undetermined".into()).replace('\n', " ");
        r.push(CheckRow::new(&format!("order {}", o.order), o.pass, format!("lhs {} | rhs {}", show(&o.lhs), show(&o.rhs))));
    }
    r.notes = report.notes.clone();
    r.results = serde_json::to_value(&report)?;
    Ok(r)
}

/// Property catalog plus every fixture: connection checks and index check.
pub fn cmd_selftest(slow: bool, mutate_eps: bool, fixtures_dir: Option<&Path>) -> Result<ReportDoc> {
    let mut r = ReportDoc::new("selftest", None);
    for row in catalog::run(slow, mutate_eps) {
        r.push(row);
    }
    let opts = RunOptions { hbar_order: None, slow };
    for (name, text) in FIXTURES {
        if SLOW_FIXTURES.contains(name) && !slow {
            r.notes.push(format!("fixture {name} skipped (needs --slow)"));
            continue;
        }
        let doc = match fixtures_dir {
            Some(dir) => ScenarioDoc::load(&dir.join(format!("{name}.json"))),
            None => ScenarioDoc::from_json(text),
        };
        let sc = match doc.and_then(ScenarioDoc::resolve) {
            Ok(sc) => sc,
            Err(e) => {
                r.push(CheckRow::new(&format!("{name}: load"), false, e.to_string()));
                continue;
            }
        };
        let conn = cmd_connection(&sc, &opts);
        r.push(summarize(&format!("{name}: connection"), conn));
        if sc.q.is_some() {
            r.push(summarize(&format!("{name}: index"), cmd_index_check(&sc, &opts)));
        }
    }
    Ok(r)
}

fn summarize(name: &str, rep: Result<ReportDoc>) -> CheckRow {
    match rep {
        Ok(rep) => {
            let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                CheckRow::new(name, true, format!("{} checks", rep.checks.len()))
            } else {
                CheckRow::new(name, false, format!("failed: {}", failed.join(", ")))
            }
        }
        Err(e) => CheckRow::new(name, false, e.to_string()),
    }
}

fn tag(what: &str, e: Error) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos, msg: format!("in {what}: {msg}") },
        other => other,
    }
}

/// 0 pass, 1 check failure, 2 usage/parse error.
pub fn exit_code(result: &Result<ReportDoc>) -> i32 {
    match result {
        Ok(r) if r.pass => 0,
        Ok(_) => 1,
        Err(e) if is_usage_error(e) => 2,
        Err(_) => 1,
    }
}

pub fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse { .. }
            | Error::Scenario(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::InvalidArgument(_)
            | Error::Geometry(_)
            | Error::Dimension(_)
            | Error::RingMismatch
            | Error::Truncation(_)
    )
}
