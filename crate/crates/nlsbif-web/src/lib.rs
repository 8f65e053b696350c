//! Browser demo: three interactive operations over the core solver, exposed
//! through `wasm-bindgen` and returning JSON for the plotting page in
//! `www/`. Grids are chosen coarse enough for interactive latency while
//! keeping the bifurcation structure intact.

pub mod demo;

use wasm_bindgen::prelude::wasm_bindgen;

/// Trace the symmetric ground-state branch for the split double well
/// (half-normalized convention) and return `E`, `N(E)`, `λ(E)` arrays.
#[wasm_bindgen]
pub fn symmetric_branch_json(p: f64, s: f64, e_max: f64) -> String {
    to_json(demo::symmetric_branch(p, s, e_max))
}

/// Locate the pitchfork (if any), switch onto both asymmetric branches, and
/// return the center-of-mass diagram data plus the normal-form summary.
#[wasm_bindgen]
pub fn pitchfork_json(p: f64, s: f64, e_max: f64) -> String {
    to_json(demo::pitchfork(p, s, e_max))
}

/// Symmetric and (past the crossing) asymmetric state profiles at one `E`.
#[wasm_bindgen]
pub fn profiles_json(p: f64, s: f64, e: f64) -> String {
    to_json(demo::profiles(p, s, e))
}

fn to_json<T: serde::Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::to_string(&serde_json::json!({ "error": msg })).unwrap()
}
