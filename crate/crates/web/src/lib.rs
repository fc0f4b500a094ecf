//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain text inputs and returns a JSON string. The
//! `*_json` functions hold the logic and also run natively.

use lao_core::extended::Ext;
use lao_core::{
    check_compatibility, compound_sweep, divergence, min_div_in_ball, reliability_matrix, BindingTerm,
    CompoundSpec, DiagonalSpec, Distribution, HypothesisFamily, LogBase, SweepAxis, SweepProbe,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest number of sweep points computed per request.
pub const MAX_SWEEP_POINTS: usize = 2000;

fn ext(v: f64) -> Value {
    serde_json::to_value(Ext(v)).expect("extended reals serialize")
}

fn numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("{t:?} is not a number")))
        .collect()
}

fn rows(text: &str) -> Result<Vec<Vec<f64>>, String> {
    text.split([';', '\n'])
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(numbers)
        .collect()
}

fn family(rows_text: &str, base: f64) -> Result<HypothesisFamily, String> {
    let base = LogBase::new(base).map_err(|e| e.to_string())?;
    HypothesisFamily::from_rows(&rows(rows_text)?, base).map_err(|e| e.to_string())
}

fn distribution(text: &str) -> Result<Distribution, String> {
    Distribution::new(numbers(text)?).map_err(|e| e.to_string())
}

/// Reliability matrix and compatibility margins for hypothesis rows
/// (`;`-separated) and the first `M-1` diagonal values.
pub fn reliability_json(rows_text: &str, spec_text: &str, base: f64) -> Result<String, String> {
    let fam = family(rows_text, base)?;
    let spec = DiagonalSpec::new(numbers(spec_text)?).map_err(|e| e.to_string())?;
    let report = check_compatibility(&fam, &spec).map_err(|e| e.to_string())?;
    let matrix = reliability_matrix(&fam, &spec).map_err(|e| e.to_string())?;
    let entries: Vec<Vec<Value>> = matrix
        .entries()
        .iter()
        .map(|r| r.iter().map(|v| ext(*v)).collect())
        .collect();
    let conditions: Vec<Value> = report
        .conditions
        .iter()
        .map(|c| {
            let (kind, other) = match c.binding {
                BindingTerm::Divergence { other } => ("divergence", other + 1),
                BindingTerm::BallMinimum { other } => ("ball-minimum", other + 1),
            };
            json!({
                "hypothesis": c.index + 1,
                "given": ext(c.given),
                "bound": ext(c.bound),
                "margin": ext(c.margin),
                "binding": kind,
                "other": other,
            })
        })
        .collect();
    Ok(json!({
        "entries": entries,
        "compatible": report.ok,
        "conditions": conditions,
        "has_zero": matrix.has_zero(),
    })
    .to_string())
}

/// Compound exponents of `objects` independent copies as one diagonal value
/// (`object`, `hypothesis`, both 1-based) runs over `points` values in
/// `[start, stop]`. Probes are the single-slot entries of the swept object
/// with the other slots at the last hypothesis.
#[allow(clippy::too_many_arguments)]
pub fn sweep_json(
    rows_text: &str,
    spec_text: &str,
    base: f64,
    objects: usize,
    object: usize,
    hypothesis: usize,
    start: f64,
    stop: f64,
    points: usize,
) -> Result<String, String> {
    let fam = family(rows_text, base)?;
    let m = fam.len();
    if object == 0 || object > objects || hypothesis == 0 || hypothesis >= m {
        return Err(format!("axis ({object}, {hypothesis}) outside {objects} objects and {} hypotheses", m - 1));
    }
    if !(2..=MAX_SWEEP_POINTS).contains(&points) || !(start.is_finite() && stop > start) {
        return Err(format!("need start < stop and 2..={MAX_SWEEP_POINTS} points"));
    }
    let spec = CompoundSpec::uniform(fam, objects, numbers(spec_text)?).map_err(|e| e.to_string())?;
    let values: Vec<f64> = (0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect();
    let axis = SweepAxis {
        object: object - 1,
        hypothesis: hypothesis - 1,
        values: values.clone(),
    };
    let mut probes = Vec::new();
    let mut names = Vec::new();
    for t in 0..m {
        for a in 0..m {
            if a == t {
                continue;
            }
            let mut truth = vec![m - 1; objects];
            let mut accepted = truth.clone();
            truth[object - 1] = t;
            accepted[object - 1] = a;
            let label = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",");
            names.push(format!("E({})|({})", label(&accepted), label(&truth)));
            probes.push(SweepProbe { truth, accepted });
        }
    }
    let pts = compound_sweep(&spec, &[axis], &probes).map_err(|e| e.to_string())?;
    let series: Vec<Value> = names
        .iter()
        .enumerate()
        .map(|(j, name)| json!({"name": name, "values": pts.iter().map(|p| ext(p.entries[j])).collect::<Vec<_>>()}))
        .collect();
    let compatible: Vec<bool> = pts.iter().map(|p| p.compatible).collect();
    Ok(json!({"coords": values, "series": series, "compatible": compatible}).to_string())
}

/// Smallest divergence from `target` over the ball of `radius` around
/// `center`, with the optimiser.
pub fn projection_json(center_text: &str, target_text: &str, radius: f64, base: f64) -> Result<String, String> {
    let base = LogBase::new(base).map_err(|e| e.to_string())?;
    let center = distribution(center_text)?;
    let target = distribution(target_text)?;
    let r = min_div_in_ball(&center, &target, radius, base).map_err(|e| e.to_string())?;
    let d_center = divergence(&r.argmin, &center, base).map_err(|e| e.to_string())?;
    Ok(json!({
        "value": ext(r.value),
        "argmin": r.argmin.probs(),
        "status": r.status,
        "argmin_divergence_from_center": ext(d_center),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn reliability(rows: &str, spec: &str, base: f64) -> Result<String, JsError> {
    reliability_json(rows, spec, base).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn sweep(
    rows: &str,
    spec: &str,
    base: f64,
    objects: usize,
    object: usize,
    hypothesis: usize,
    start: f64,
    stop: f64,
    points: usize,
) -> Result<String, JsError> {
    sweep_json(rows, spec, base, objects, object, hypothesis, start, stop, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn projection(center: &str, target: &str, radius: f64, base: f64) -> Result<String, JsError> {
    projection_json(center, target, radius, base).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROWS: &str = "0.10 0.90; 0.85 0.15; 0.23 0.77";

    #[test]
    fn reliability_output() {
        let v: Value = serde_json::from_str(&reliability_json(ROWS, "0.1, 0.1", 2.0).unwrap()).unwrap();
        assert_eq!(v["compatible"], true);
        assert_eq!(v["entries"].as_array().unwrap().len(), 3);
        assert_eq!(v["entries"][0][0], 0.1);
        assert!(reliability_json(ROWS, "0.1", 2.0).is_err());
        assert!(reliability_json("0.5 0.3; 0.2 0.8", "0.1", 2.0).is_err());
    }

    #[test]
    fn sweep_output() {
        let v: Value =
            serde_json::from_str(&sweep_json(ROWS, "0.05, 0.5", 2.0, 2, 1, 2, 0.5, 2.0, 31).unwrap()).unwrap();
        assert_eq!(v["coords"].as_array().unwrap().len(), 31);
        assert_eq!(v["series"].as_array().unwrap().len(), 6);
        assert!(sweep_json(ROWS, "0.05, 0.5", 2.0, 2, 1, 3, 0.5, 2.0, 31).is_err());
        assert!(sweep_json(ROWS, "0.05, 0.5", 2.0, 2, 1, 2, 0.5, 2.0, 1).is_err());
    }

    #[test]
    fn projection_output() {
        let v: Value = serde_json::from_str(&projection_json("0.3 0.7", "0.8 0.2", 0.1, 2.0).unwrap()).unwrap();
        assert_eq!(v["status"], "boundary-optimum");
        let on_sphere = v["argmin_divergence_from_center"].as_f64().unwrap();
        assert!((on_sphere - 0.1).abs() < 1e-8);
        let v: Value = serde_json::from_str(&projection_json("0.3 0.7", "0.3 0.7", 0.1, 2.0).unwrap()).unwrap();
        assert_eq!(v["value"], 0.0);
    }
}
