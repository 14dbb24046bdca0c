//! Browser bindings for the gaussent demo page.
//!
//! Every export takes plain numbers and returns a JSON string, so the same
//! functions run natively in tests. Failures come back as `{"error": "..."}`.

use gaussent::channels::{
    amplifier, apply_one_sided, classical_noise, classify, erase_to_vacuum, identity, make_channel,
    phase_conjugate, pure_loss, GaussianChannel, BOUNDARY_TOL,
};
use gaussent::separability::{log_negativity, two_mode_separable};
use gaussent::states::tmss;
use gaussent::symplectic::is_physical;
use gaussent::verifier::sweep_entanglement_ratio;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const CHANNEL_TOL: f64 = 1e-12;
const VERDICT_TOL: f64 = 1e-9;

fn error(msg: impl ToString) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

fn to_array(v: &[f64], what: &str) -> Result<[f64; 4], String> {
    v.try_into()
        .map_err(|_| format!("{what} needs 4 entries, got {}", v.len()))
}

fn channel(f: &[f64], g: &[f64]) -> Result<GaussianChannel, String> {
    let (f, g) = GaussianChannel::from_row_major(to_array(f, "f")?, to_array(g, "g")?);
    make_channel(f, g, CHANNEL_TOL).map_err(|e| e.to_string())
}

fn respond(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => error(e),
    }
}

/// Row-major `f` and `g` of a named catalog channel.
#[wasm_bindgen]
pub fn catalog_channel(name: &str, param: f64) -> String {
    let ch = match name {
        "pure_loss" => pure_loss(param),
        "amplifier" => amplifier(param),
        "classical_noise" => classical_noise(param),
        "phase_conjugate" => phase_conjugate(param),
        "erase_to_vacuum" => erase_to_vacuum(),
        "identity" => Ok(identity()),
        other => return error(format!("unknown channel {other:?}")),
    };
    respond(
        ch.map(|ch| json!({ "f": ch.f_row_major(), "g": ch.g_row_major() }))
            .map_err(|e| e.to_string()),
    )
}

/// Validity and entanglement verdict of `(f, g)`.
///
/// Invalid pairs are still placed in the `(det f, det g)` plane, with
/// `valid: false` and the reason.
#[wasm_bindgen]
pub fn classify_channel(f: &[f64], g: &[f64]) -> String {
    respond((|| {
        let (fm, gm) = GaussianChannel::from_row_major(to_array(f, "f")?, to_array(g, "g")?);
        let raw = GaussianChannel::new_unchecked(fm, gm);
        let verdict = classify(&raw, BOUNDARY_TOL);
        let validity = make_channel(fm, gm, CHANNEL_TOL)
            .err()
            .map(|e| e.to_string());
        Ok(json!({
            "valid": validity.is_none(),
            "reason": validity,
            "kind": verdict.kind,
            "margin": verdict.margin,
            "det_f": raw.det_f(),
            "det_g": raw.det_g(),
        }))
    })())
}

/// Log-negativity of `tmss(r)` before and after the channel, on `steps`
/// evenly spaced points in `(0, r_max]`.
#[wasm_bindgen]
pub fn sweep(f: &[f64], g: &[f64], r_max: f64, steps: u32) -> String {
    respond((|| {
        let ch = channel(f, g)?;
        if steps == 0 || r_max <= 0.0 || !r_max.is_finite() {
            return Err("need steps >= 1 and finite r_max > 0".into());
        }
        let grid: Vec<f64> = (1..=steps)
            .map(|k| r_max * k as f64 / steps as f64)
            .collect();
        let s = sweep_entanglement_ratio(&ch, &grid).map_err(|e| e.to_string())?;
        Ok(json!({ "rows": s.rows, "degenerate": s.degenerate }))
    })())
}

/// Sends the second mode of `tmss(r)` through the channel.
#[wasm_bindgen]
pub fn evolve_tmss(r: f64, f: &[f64], g: &[f64]) -> String {
    respond((|| {
        let ch = channel(f, g)?;
        let input = tmss(r).map_err(|e| e.to_string())?;
        let out = apply_one_sided(&input, &ch, 1).map_err(|e| e.to_string())?;
        let sep = two_mode_separable(&out, VERDICT_TOL).map_err(|e| e.to_string())?;
        Ok(json!({
            "input": input.to_row_major(),
            "output": out.to_row_major(),
            "physical": is_physical(&out, VERDICT_TOL),
            "separable": sep.separable,
            "separability_margin": sep.margin,
            "e_in": log_negativity(&input, 1).map_err(|e| e.to_string())?,
            "e_out": log_negativity(&out, 1).map_err(|e| e.to_string())?,
        }))
    })())
}
