//! Browser bindings: invariants at a point, point classes on a grid and
//! reconstruction of the constant-coefficient family as a mesh.
//!
//! Every export returns a JSON string; errors are thrown as JS strings.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;

use lorentz_core::bonnet::{reconstruct, standard_frame, ReconstructOptions};
use lorentz_core::catalog;
use lorentz_core::grid::{Domain, GridSpec};
use lorentz_core::invariants::second_order_invariants;
use lorentz_core::jets::{evaluate_jet, FundamentalData};
use lorentz_core::pe4::Vec4;
use lorentz_core::pnmcv::{gf_from_canonical, natural_pde_residuals, CanonicalTriple};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn params(text: &str) -> Result<BTreeMap<String, f64>, String> {
    if text.trim().is_empty() {
        return Ok(BTreeMap::new());
    }
    serde_json::from_str(text).map_err(|e| format!("parameters must be a JSON object of numbers: {e}"))
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("results serialize")
}

/// Invariants of a catalog surface at `(u, v)`.
pub fn invariants_json(surface: &str, params_json: &str, u: f64, v: f64) -> Result<String, String> {
    let spec = catalog::by_name(surface, &params(params_json)?).map_err(|e| e.to_string())?;
    let jet = evaluate_jet(&spec, u, v).map_err(|e| e.to_string())?;
    let fund = FundamentalData::from_jet(&jet).map_err(|e| e.to_string())?;
    let r = second_order_invariants(&fund);
    Ok(to_json(&json!({
        "surface": surface,
        "u": u,
        "v": v,
        "E": r.e, "F": r.f, "G": r.g,
        "L": r.l, "M": r.m, "N": r.n,
        "k": r.k, "kappa": r.kappa, "K": r.gauss, "D": r.d,
        "H": r.h,
        "H_causal": r.h_causal.as_str(),
        "class": r.point_class.kind.as_str(),
    })))
}

/// Point-class counts on an `n x n` grid over the surface's domain.
pub fn classify_json(surface: &str, params_json: &str, n: usize) -> Result<String, String> {
    let spec = catalog::by_name(surface, &params(params_json)?).map_err(|e| e.to_string())?;
    let grid = GridSpec::new(spec.domain, n, n).map_err(|e| e.to_string())?;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut classes = Vec::with_capacity(grid.len());
    for (i, j) in grid.nodes() {
        let class = evaluate_jet(&spec, grid.u(i), grid.v(j))
            .and_then(|jet| FundamentalData::from_jet(&jet))
            .map(|f| second_order_invariants(&f).point_class.kind.as_str().to_string())
            .unwrap_or_else(|e| format!("error:{}", e.code()));
        *counts.entry(class.clone()).or_insert(0) += 1;
        classes.push(class);
    }
    Ok(to_json(&json!({ "domain": spec.domain, "n": n, "counts": counts, "classes": classes })))
}

#[derive(Serialize)]
struct Mesh {
    /// Flattened `[x, y, z]` triples in the chosen projection.
    vertices: Vec<f64>,
    /// Flattened vertex-index triples, two triangles per cell.
    faces: Vec<u32>,
    pde_residual: f64,
    max_gram_drift: f64,
    path_discrepancy: f64,
}

/// Builds the surface with constant `(λ, μ, ν)` in canonical parameters on
/// `[0, size]²` and projects it onto the coordinates in `projection` (0-based).
pub fn constants_mesh_json(lambda: f64, mu: f64, nu: f64, n: usize, size: f64, projection: &[usize]) -> Result<String, String> {
    let proj: [usize; 3] = match projection {
        [a, b, c] if [a, b, c].iter().all(|k| **k < 4) => [*a, *b, *c],
        _ => return Err("projection needs three coordinates between 0 and 3".into()),
    };
    if !(size > 0.0) {
        return Err("size must be positive".into());
    }
    let grid = GridSpec::new(Domain::new(0.0, size, 0.0, size), n, n).map_err(|e| e.to_string())?;
    let t = CanonicalTriple::sample(grid, 1, |_, _| (lambda, mu, nu)).map_err(|e| e.to_string())?;
    let pde_residual = natural_pde_residuals(&t).map_err(|e| e.to_string())?.max();
    let g = gf_from_canonical(&t).map_err(|e| e.to_string())?;
    let rec = reconstruct(&g, &standard_frame(1), (n / 2, n / 2), Vec4::ZERO, ReconstructOptions::default())
        .map_err(|e| e.to_string())?;
    let mut vertices = Vec::with_capacity(3 * grid.len());
    for p in rec.z.iter().flatten() {
        let c = p.to_array();
        vertices.extend(proj.map(|k| c[k]));
    }
    let idx = |i: usize, j: usize| (i * n + j) as u32;
    let mut faces = Vec::with_capacity(6 * (n - 1) * (n - 1));
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            faces.extend([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.extend([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Ok(to_json(&Mesh {
        vertices,
        faces,
        pde_residual,
        max_gram_drift: rec.diagnostics.max_gram_drift,
        path_discrepancy: rec.diagnostics.path_discrepancy,
    }))
}

#[wasm_bindgen]
pub fn invariants(surface: &str, params_json: &str, u: f64, v: f64) -> Result<String, JsValue> {
    invariants_json(surface, params_json, u, v).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn classify(surface: &str, params_json: &str, n: usize) -> Result<String, JsValue> {
    classify_json(surface, params_json, n).map_err(JsValue::from)
}

#[wasm_bindgen(js_name = constantsMesh)]
pub fn constants_mesh(lambda: f64, mu: f64, nu: f64, n: usize, size: f64, projection: Vec<usize>) -> Result<String, JsValue> {
    constants_mesh_json(lambda, mu, nu, n, size, &projection).map_err(JsValue::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn invariants_at_the_graph_origin() {
        let r = parse(invariants_json("graphP", r#"{"c": 2}"#, 0.0, 0.0).unwrap());
        assert_eq!(r["L"], -4.0);
        assert_eq!(r["N"], -4.0);
        assert_eq!(r["K"], -3.0);
        assert_eq!(r["class"], "GeneralSpacelikeH");
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(invariants_json("torus", "", 0.0, 0.0).is_err());
        assert!(invariants_json("graphP", "[1]", 0.0, 0.0).is_err());
        assert!(invariants_json("graphP", "", 50.0, 0.0).is_err());
        assert!(constants_mesh_json(4.0, 5.0, 3.0, 11, 0.5, &[0, 1]).is_err());
        assert!(constants_mesh_json(4.0, 0.0, 3.0, 11, 0.5, &[0, 1, 2]).is_err());
    }

    #[test]
    fn classify_counts_every_node() {
        let r = parse(classify_json("plane", "", 5).unwrap());
        assert_eq!(r["counts"]["Flat"], 25);
        assert_eq!(r["classes"].as_array().unwrap().len(), 25);
    }

    #[test]
    fn constants_mesh_has_consistent_topology() {
        let m = parse(constants_mesh_json(4.0, 5.0, 3.0, 11, 0.4, &[0, 1, 2]).unwrap());
        assert_eq!(m["vertices"].as_array().unwrap().len(), 3 * 121);
        let faces = m["faces"].as_array().unwrap();
        assert_eq!(faces.len(), 6 * 100);
        assert!(faces.iter().all(|f| f.as_u64().unwrap() < 121));
        assert!(m["pde_residual"].as_f64().unwrap() < 1e-12);
        assert!(m["max_gram_drift"].as_f64().unwrap() < 1e-5, "{}", m["max_gram_drift"]);
        let centre = &m["vertices"].as_array().unwrap()[3 * 60..3 * 61];
        assert!(centre.iter().all(|x| x.as_f64().unwrap() == 0.0));
    }
}
