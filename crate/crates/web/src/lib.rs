//! Browser bindings. Every export takes plain numbers or strings and returns
//! a JSON document, so the page needs no glue beyond `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use fluxgraph::datagen::{pa_sequence, PaConfig, Schedule};
use fluxgraph::eval::{edge_error, vertex_error};
use fluxgraph::ingest::{boundary_schedule, expanding_windows, parse_edgelist_str, Granularity};
use fluxgraph::predictor::{PredictParams, PredictedGraph, Predictor};
use fluxgraph::GraphSeries;

/// Largest synthetic series the page may ask for; keeps each call well
/// under a second.
const MAX_SNAPSHOTS: usize = 30;

#[derive(Serialize)]
struct Counts {
    vertices: Vec<usize>,
    edges: Vec<usize>,
}

impl Counts {
    fn of(series: &GraphSeries) -> Self {
        Counts {
            vertices: series.snapshots().iter().map(|g| g.vertex_count()).collect(),
            edges: series.snapshots().iter().map(|g| g.edge_count()).collect(),
        }
    }
}

#[derive(Serialize)]
struct Prediction {
    gamma: f64,
    u: f64,
    h: usize,
    vertices: usize,
    edges: usize,
    n_hat: usize,
    edge_bound: f64,
    candidates: usize,
    ilp_objective: f64,
    lp_objective: Option<f64>,
    /// Top predicted degrees with their bounds, as `[vertex, degree, bound]`.
    hubs: Vec<(u64, usize, f64)>,
}

impl From<&PredictedGraph> for Prediction {
    fn from(p: &PredictedGraph) -> Self {
        let mut hubs: Vec<(u64, usize, f64)> = p
            .degree_bounds
            .iter()
            .map(|(v, b)| (v.0, p.graph.degree(*v).unwrap_or(0), *b))
            .collect();
        hubs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        hubs.truncate(10);
        let d = &p.diagnostics;
        Prediction {
            gamma: p.params.gamma,
            u: p.params.u,
            h: p.params.h,
            vertices: p.graph.vertex_count(),
            edges: p.graph.edge_count(),
            n_hat: d.n_hat,
            edge_bound: p.edge_bound,
            candidates: d.candidate_count,
            ilp_objective: d.ilp_objective,
            lp_objective: d.lp_objective,
            hubs,
        }
    }
}

#[derive(Serialize)]
struct Truth {
    vertices: usize,
    edges: usize,
    vertex_error: f64,
    edge_error: f64,
    baseline_vertex_error: f64,
    baseline_edge_error: f64,
}

#[derive(Serialize)]
struct SyntheticRun {
    observed: Counts,
    prediction: Prediction,
    truth: Truth,
}

#[derive(Serialize)]
struct Grid {
    observed: Counts,
    cells: Vec<Prediction>,
}

#[derive(Serialize)]
struct Uploaded {
    observed: Counts,
    skipped_lines: usize,
    prediction: Prediction,
}

fn params(gamma: f64, u: f64, h: usize) -> Result<PredictParams, String> {
    let p = PredictParams {
        gamma,
        u,
        h,
        ..PredictParams::default()
    };
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

fn synthetic(seed: u64, snapshots: usize, s: usize) -> Result<GraphSeries, String> {
    if !(4..=MAX_SNAPSHOTS).contains(&snapshots) {
        return Err(format!("snapshots must be between 4 and {MAX_SNAPSHOTS}"));
    }
    let cfg = PaConfig {
        s,
        s0: s.max(3),
        length: snapshots,
        schedule: Schedule::Uniform {
            offset: 20,
            step: 5,
            width: 5,
        },
        seed,
    };
    pa_sequence(&cfg).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Trains on the first `train` snapshots of a generated series and scores
/// the forecast `h` steps ahead against the generated truth.
pub fn predict_synthetic_json(
    seed: u64,
    train: usize,
    s: usize,
    gamma: f64,
    u: f64,
    h: usize,
) -> Result<String, String> {
    let p = params(gamma, u, h)?;
    let full = synthetic(seed, train + h, s)?;
    let observed = full.window(1, train).map_err(|e| e.to_string())?;
    let pred = Predictor::new(&observed)
        .and_then(|pr| pr.predict(&p))
        .map_err(|e| e.to_string())?;
    let actual = full.last();
    let score = |r: fluxgraph::Result<f64>| r.map_err(|e| e.to_string());
    let truth = Truth {
        vertices: actual.vertex_count(),
        edges: actual.edge_count(),
        vertex_error: score(vertex_error(&pred.graph, actual))?,
        edge_error: score(edge_error(&pred.graph, actual))?,
        baseline_vertex_error: score(vertex_error(observed.last(), actual))?,
        baseline_edge_error: score(edge_error(observed.last(), actual))?,
    };
    to_json(&SyntheticRun {
        observed: Counts::of(&observed),
        prediction: Prediction::from(&pred),
        truth,
    })
}

/// One prediction per `(gamma, u)` pair, row-major over the gammas.
pub fn quantile_grid_json(
    seed: u64,
    train: usize,
    s: usize,
    h: usize,
    gammas: &[f64],
    us: &[f64],
) -> Result<String, String> {
    let base = params(0.5, 0.5, h)?;
    let series = synthetic(seed, train, s)?;
    let cells = Predictor::new(&series)
        .and_then(|pr| pr.distribution(gammas, us, &base))
        .map_err(|e| e.to_string())?;
    to_json(&Grid {
        observed: Counts::of(&series),
        cells: cells.iter().map(Prediction::from).collect(),
    })
}

/// Predicts from pasted `u v t` lines bucketed at `granularity`
/// (`daily`, `weekly`, `biweekly` or `ticks:N`).
pub fn predict_edgelist_json(
    text: &str,
    granularity: &str,
    gamma: f64,
    u: f64,
    h: usize,
) -> Result<String, String> {
    let p = params(gamma, u, h)?;
    let granularity: Granularity = granularity.parse().map_err(|e: fluxgraph::Error| e.to_string())?;
    let parsed = parse_edgelist_str(text).map_err(|e| e.to_string())?;
    let boundaries = boundary_schedule(&parsed.events, granularity).map_err(|e| e.to_string())?;
    let series = expanding_windows(&parsed.events, &boundaries).map_err(|e| e.to_string())?;
    let pred = Predictor::new(&series)
        .and_then(|pr| pr.predict(&p))
        .map_err(|e| e.to_string())?;
    to_json(&Uploaded {
        observed: Counts::of(&series),
        skipped_lines: parsed.malformed + parsed.self_loops,
        prediction: Prediction::from(&pred),
    })
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = predictSynthetic)]
pub fn predict_synthetic(
    seed: u32,
    train: usize,
    s: usize,
    gamma: f64,
    u: f64,
    h: usize,
) -> Result<String, JsError> {
    js(predict_synthetic_json(seed.into(), train, s, gamma, u, h))
}

#[wasm_bindgen(js_name = quantileGrid)]
pub fn quantile_grid(
    seed: u32,
    train: usize,
    s: usize,
    h: usize,
    gammas: Vec<f64>,
    us: Vec<f64>,
) -> Result<String, JsError> {
    js(quantile_grid_json(seed.into(), train, s, h, &gammas, &us))
}

#[wasm_bindgen(js_name = predictEdgeList)]
pub fn predict_edgelist(
    text: &str,
    granularity: &str,
    gamma: f64,
    u: f64,
    h: usize,
) -> Result<String, JsError> {
    js(predict_edgelist_json(text, granularity, gamma, u, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: Result<String, String>) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn synthetic_prediction_reports_truth_and_baseline() {
        let v = parse(predict_synthetic_json(3, 10, 3, 0.5, 0.8, 2));
        assert_eq!(v["observed"]["vertices"].as_array().unwrap().len(), 10);
        assert_eq!(v["prediction"]["h"], 2);
        assert!(v["truth"]["baseline_vertex_error"].as_f64().unwrap() > 0.0);
        assert!(v["prediction"]["hubs"].as_array().unwrap().len() <= 10);
        assert_eq!(
            predict_synthetic_json(3, 10, 3, 0.5, 0.8, 2),
            predict_synthetic_json(3, 10, 3, 0.5, 0.8, 2)
        );
    }

    #[test]
    fn grid_is_row_major() {
        let v = parse(quantile_grid_json(1, 8, 2, 1, &[0.1, 0.9], &[0.5, 0.7, 0.9]));
        let cells = v["cells"].as_array().unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0]["gamma"], 0.1);
        assert_eq!(cells[2]["u"], 0.9);
        assert_eq!(cells[3]["gamma"], 0.9);
    }

    #[test]
    fn pasted_edges() {
        let text = "0 1 1\n1 2 1\n0 2 2\n2 3 3\n3 4 4\n1 4 5\n4 5 6\n5 5 6\n";
        let v = parse(predict_edgelist_json(text, "ticks:1", 0.5, 0.8, 1));
        assert_eq!(v["observed"]["edges"], serde_json::json!([2, 3, 4, 5, 6, 7]));
        assert_eq!(v["skipped_lines"], 1);
    }

    #[test]
    fn errors_are_strings() {
        assert!(predict_synthetic_json(1, 2, 3, 0.5, 0.8, 1).is_err());
        assert!(predict_synthetic_json(1, 10, 3, 1.5, 0.8, 1).is_err());
        assert!(predict_edgelist_json("0 1 1\n", "hourly", 0.5, 0.8, 1).is_err());
    }
}
