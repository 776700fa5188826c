//! Browser bindings. Each export returns flat `f64` arrays that the page
//! plots on a canvas; models are given as `brownian:c=0.5` style strings.

use fluidq::cli::ModelSpec;
use fluidq::excursion_laws::{brownian, ExcursionLaws};
use fluidq::scale_fn::ScaleFunction;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 2000;

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(n >= 2 && n <= MAX_POINTS) {
        return Err(format!("point count must be in 2..={MAX_POINTS}, got {n}"));
    }
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(format!("need 0 <= lo < hi, got [{lo}, {hi}]"));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

fn laws_for(model: &str) -> Result<ExcursionLaws, String> {
    let m = ModelSpec::parse(model).map_err(|e| e.to_string())?.build();
    ExcursionLaws::new(&m).map_err(|e| e.to_string())
}

/// `[x_0, W_0, x_1, W_1, ...]` for `W^{(q)}` on `[0, x_max]`.
pub fn scale_curve_native(model: &str, q: f64, x_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let m = ModelSpec::parse(model).map_err(|e| e.to_string())?.build();
    let w = ScaleFunction::new(&m, q).map_err(|e| e.to_string())?;
    let xs = grid(0.0, x_max, n)?;
    let t = w.table(&xs).map_err(|e| e.to_string())?;
    Ok(t.xs.iter().zip(&t.values).flat_map(|(x, v)| [*x, *v]).collect())
}

/// `[x, P_d(Q* ≤ x), P(Q* ≤ x | Q_0 > 0), ...]`.
pub fn qstar_cdfs_native(model: &str, x_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let laws = laws_for(model)?;
    let mut out = Vec::with_capacity(3 * n);
    for x in grid(0.0, x_max, n)? {
        out.push(x);
        out.push(laws.qstar_cdf(x).map_err(|e| e.to_string())?);
        out.push(laws.qstar_conditional_cdf(x).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Observed busy-period length density for each `c`: rows of
/// `[v, f(v; c_0), f(v; c_1), ...]`.
pub fn busy_density_native(cs: &[f64], v_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if cs.is_empty() || cs.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
        return Err("every c must lie in (0, 1)".into());
    }
    let vs = grid(0.0, v_max, n)?;
    let mut out = Vec::with_capacity(vs.len() * (cs.len() + 1));
    for &v in &vs[1..] {
        out.push(v);
        for &c in cs {
            out.push(brownian::busy_length_density(v, c).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn scale_curve(model: &str, q: f64, x_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    scale_curve_native(model, q, x_max, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn qstar_cdfs(model: &str, x_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    qstar_cdfs_native(model, x_max, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn busy_density(cs: &[f64], v_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    busy_density_native(cs, v_max, n).map_err(|e| JsValue::from_str(&e))
}
