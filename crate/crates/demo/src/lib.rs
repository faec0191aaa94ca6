//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export returns a JSON string; failures come back as a JavaScript
//! `Error` carrying the library's message.

use fwdiff::forward_diff::forward_difference;
use fwdiff::generators::{fixtures, tree_averaging};
use fwdiff::synergy::gaussian_delta_partial_form;
use fwdiff::{
    classify_suppression, cluster_scan, colour_synergies, dag_to_correlation,
    gaussian_delta_closed_form, xor_table, EntropyOracle, VariableSet, XorTableParams,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const SUPPRESSION_TOL: f64 = 0.01;

#[derive(Serialize)]
struct TripleReport {
    pairs: [f64; 3],
    delta: f64,
    delta_closed_form: f64,
    delta_partial_form: f64,
    synergy: bool,
    /// Suppression type with each variable as the response, when a synergy.
    suppression: Option<[String; 3]>,
}

fn suppression_name(t: fwdiff::SuppressionType) -> String {
    serde_json::to_value(t)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn triple_report(r12: f64, r13: f64, r23: f64) -> Result<String, String> {
    let corr = fwdiff::CorrelationMatrix::from_lower_triangle(&[1.0, r12, 1.0, r13, r23, 1.0])
        .map_err(|e| e.to_string())?;
    let oracle = EntropyOracle::gaussian(corr.clone());
    let d =
        |s: &[usize]| forward_difference(&oracle, VariableSet::from(s)).map_err(|e| e.to_string());
    let pairs = [d(&[0, 1])?, d(&[0, 2])?, d(&[1, 2])?];
    let delta = d(&[0, 1, 2])?;
    let synergy = delta < -fwdiff::entropy::ANALYTIC_ZERO_TOL;
    let suppression = if synergy {
        let mut names: [String; 3] = Default::default();
        for (response, slot) in names.iter_mut().enumerate() {
            let t = classify_suppression(&corr, 0, 1, 2, response, SUPPRESSION_TOL)
                .map_err(|e| e.to_string())?;
            *slot = suppression_name(t);
        }
        Some(names)
    } else {
        None
    };
    let report = TripleReport {
        pairs,
        delta,
        delta_closed_form: gaussian_delta_closed_form(r12, r13, r23).map_err(|e| e.to_string())?,
        delta_partial_form: gaussian_delta_partial_form(r12, r13, r23)
            .map_err(|e| e.to_string())?,
        synergy,
        suppression,
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct XorPoint {
    alpha: f64,
    delta: f64,
    closed_form: f64,
}

pub fn xor_points(steps: usize) -> Result<String, String> {
    if steps < 2 {
        return Err("at least two steps are needed".into());
    }
    let points = (1..=steps)
        .map(|s| {
            let alpha = 0.25 * s as f64 / (steps + 1) as f64;
            let params = XorTableParams::new(alpha).map_err(|e| e.to_string())?;
            let oracle = EntropyOracle::categorical(xor_table(params));
            let delta =
                forward_difference(&oracle, VariableSet::full(3)).map_err(|e| e.to_string())?;
            Ok(XorPoint {
                alpha,
                delta,
                closed_form: params.delta_closed_form(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct TreeNode {
    name: String,
    colour: &'static str,
}

#[derive(Serialize)]
struct TreeFinding {
    triple: Vec<String>,
    collider: String,
    delta: f64,
}

#[derive(Serialize)]
struct TreeScan {
    nodes: Vec<TreeNode>,
    edges: Vec<(usize, usize, bool)>,
    findings: Vec<TreeFinding>,
    triples: usize,
    dot: String,
}

pub fn tree_report(alpha: f64, moralize: bool, threshold: f64) -> Result<String, String> {
    let dag = tree_averaging(alpha).map_err(|e| e.to_string())?;
    let oracle = EntropyOracle::gaussian(dag_to_correlation(&dag).map_err(|e| e.to_string())?);
    let g = if moralize {
        dag.graph().moral_graph()
    } else {
        dag.graph().skeleton()
    };
    let scan = cluster_scan(&g, &oracle, 3, threshold).map_err(|e| e.to_string())?;
    let coloured = colour_synergies(&g, &scan.findings).map_err(|e| e.to_string())?;
    let names = g.names();
    let report = TreeScan {
        nodes: (0..g.p())
            .map(|i| TreeNode {
                name: names[i].clone(),
                colour: coloured.colour(i).as_str(),
            })
            .collect(),
        edges: g
            .edges()
            .into_iter()
            .map(|(i, j)| (i, j, coloured.edge_highlights.contains(&(i, j))))
            .collect(),
        findings: scan
            .findings
            .iter()
            .map(|f| TreeFinding {
                triple: f.triple.iter().map(|i| names[i].clone()).collect(),
                collider: names[f.collider].clone(),
                delta: f.delta,
            })
            .collect(),
        triples: scan.cluster_deltas(3).len(),
        dot: coloured.to_dot(),
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// Correlations the page starts from.
pub fn default_triple() -> [f64; 3] {
    let c = fixtures::gaussian_triple(0.2).expect("fixture is valid");
    [c.get(0, 1), c.get(0, 2), c.get(1, 2)]
}

#[wasm_bindgen(js_name = gaussianTriple)]
pub fn gaussian_triple(r12: f64, r13: f64, r23: f64) -> Result<String, JsError> {
    triple_report(r12, r13, r23).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = xorSweep)]
pub fn xor_sweep(steps: usize) -> Result<String, JsError> {
    xor_points(steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = treeScan)]
pub fn tree_scan(alpha: f64, moralize: bool, threshold: f64) -> Result<String, JsError> {
    tree_report(alpha, moralize, threshold).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = defaultTriple)]
pub fn default_triple_js() -> Vec<f64> {
    default_triple().to_vec()
}
