//! WebAssembly bindings for the static demo page: a star-product
//! calculator, a torus index check with an adjustable Ω_ħ, and the Â series.
//!
//! Every export returns a JSON string; errors come back as `{"error": …}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use fedosov_index::chern_weil::ahat_scalar;
use fedosov_index::cli::{cmd_index_check, cmd_star, fixture, RunOptions, ScenarioDoc};
use fedosov_index::coefficients::parse_rational;
use fedosov_index::Result;

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn plane(unit_poisson: bool) -> ScenarioDoc {
    let mut doc = fixture("flat-r2").expect("built-in fixture");
    doc.name = "plane".into();
    doc.ring = fedosov_index::coefficients::ChartRing::Poly { max_degree: 8 };
    doc.idempotent = None;
    if unit_poisson {
        doc.omega_lower = Some(vec![vec!["0".into(), "-1".into()], vec!["1".into(), "0".into()]]);
    }
    doc
}

/// a⋆b and [a, b]⋆ on the flat plane through ħ^order. With `unit_poisson`
/// the Poisson bracket is {x¹, x²} = 1; otherwise ω = dx¹dx².
#[wasm_bindgen]
pub fn star_product(a: &str, b: &str, order: i32, unit_poisson: bool) -> String {
    respond((|| {
        let sc = plane(unit_poisson).resolve()?;
        let opts = RunOptions { hbar_order: Some(order.clamp(0, 2)), slow: false };
        let rep = cmd_star(&sc, a, b, &opts)?;
        Ok(json!({
            "product": rep.results["a_star_b"],
            "commutator": rep.results["commutator"],
        }))
    })())
}

/// Index check on the torus with Ω_ħ = ħ(c + cos x¹)dx¹dx², for the trivial
/// line bundle (`rotation = false`) or the rotating rank-one projector in
/// a rank-two bundle.
#[wasm_bindgen]
pub fn torus_index(c: &str, rotation: bool) -> String {
    respond((|| {
        let c = parse_rational(c.trim())?;
        let mut doc = fixture(if rotation { "torus-gauge-bundle" } else { "torus-constant" })?;
        doc.omega_h[0].coefficient = format!("h*({c} + cos(x1))");
        let sc = doc.resolve()?;
        let rep = cmd_index_check(&sc, &RunOptions::default())?;
        let rows: Vec<Value> = rep
            .checks
            .iter()
            .zip(rep.results["orders"].as_array().into_iter().flatten())
            .map(|(row, o)| json!({ "order": o["order"], "lhs": o["lhs"], "rhs": o["rhs"], "pass": row.pass }))
            .collect();
        Ok(json!({ "pass": rep.pass, "orders": rows }))
    })())
}

/// Coefficients of (x/sinh x)^{1/2} through x^{len−1}.
#[wasm_bindgen]
pub fn ahat_coefficients(len: usize) -> String {
    respond(ahat_scalar(len.clamp(1, 24)).map(|s| json!(s.0.iter().map(|c| c.to_string()).collect::<Vec<_>>())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_commutator_on_the_unit_plane() {
        let v: Value = serde_json::from_str(&star_product("x1", "x2", 1, true)).unwrap();
        assert_eq!(v["commutator"][0], "(1) h");
    }

    #[test]
    fn torus_index_follows_the_constant() {
        let v: Value = serde_json::from_str(&torus_index("2/5", false)).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["orders"][1]["lhs"], "-2/5");
        let v: Value = serde_json::from_str(&torus_index("1/3", true)).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["orders"][1]["rhs"], "-1/3");
    }

    #[test]
    fn errors_are_reported() {
        let v: Value = serde_json::from_str(&star_product("x1 +", "x2", 1, true)).unwrap();
        assert!(v["error"].as_str().unwrap().contains("position"));
        let v: Value = serde_json::from_str(&torus_index("abc", false)).unwrap();
        assert!(v.get("error").is_some());
    }

    #[test]
    fn ahat_series() {
        let v: Value = serde_json::from_str(&ahat_coefficients(5)).unwrap();
        assert_eq!(v, json!(["1", "0", "-1/12", "0", "1/160"]));
    }
}
