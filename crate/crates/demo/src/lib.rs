//! Browser bindings for the kfsm library. Each export has a plain Rust twin
//! so it can be tested natively.

use wasm_bindgen::prelude::*;

use kfsm::circlemap::{flat_range, BimodalMap};
use kfsm::hm::{b_k_rational, small_fraction};
use kfsm::interp::{default_budget, diagram_svg as render_svg, level_diagram, rotation_number as rho, InterpolatedMap};
use kfsm::Rational;

fn parse_list(s: &str) -> Result<Vec<Rational>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse().map_err(|e| format!("{e}"))).collect()
}

/// `B_k(omega, nu)` as JSON; an empty `nu` means the Sturmian `(1 - omega, ..)`.
pub fn cluster(k: u32, omega: &str, nu: &str) -> Result<String, String> {
    let omega: Rational = omega.trim().parse().map_err(|e| format!("{e}"))?;
    let (p, q) = small_fraction(&omega).map_err(|e| e.to_string())?;
    let mut nu = parse_list(nu)?;
    if nu.is_empty() {
        nu = vec![Rational::one() - &omega; k as usize];
    }
    let c = b_k_rational(k, p, q, &nu).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&c).expect("serializable"))
}

/// The rotation-number diagram of the model map as an SVG document.
pub fn diagram(k: u32, max_den: u32) -> Result<String, String> {
    if !(1..=12).contains(&max_den) {
        return Err("max denominator must be between 1 and 12".into());
    }
    let g = BimodalMap::model();
    let rows = level_diagram(&g, k, max_den as u64).map_err(|e| e.to_string())?;
    Ok(render_svg(&rows, &flat_range(&g).map_err(|e| e.to_string())?))
}

/// Rotation number of `H_{k,c}` for the model map; `k` is the length of `c`.
pub fn rotation(c: &str) -> Result<String, String> {
    let c = parse_list(c)?;
    let h = InterpolatedMap::new(&BimodalMap::model(), c.clone()).map_err(|e| e.to_string())?;
    Ok(rho(&h, default_budget(c.len() as u32, 100)).to_string())
}

#[wasm_bindgen]
pub fn cluster_json(k: u32, omega: &str, nu: &str) -> Result<String, JsError> {
    cluster(k, omega, nu).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn diagram_svg(k: u32, max_den: u32) -> Result<String, JsError> {
    diagram(k, max_den).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn rotation_number(c: &str) -> Result<String, JsError> {
    rotation(c).map_err(|e| JsError::new(&e))
}
