//! End-to-end prediction: forecasts, hypothetical graph, constraint system
//! and integer program, plus the sweep over the two quantile parameters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::candidates::{hypothetical_from, vertex_count_from, HypotheticalGraph};
use crate::constraints::{assemble_with, ConstraintSystem, SeriesForecasts, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSeries, VertexId};
use crate::solver::solve_ilp;

/// Shortest series [`predict`] accepts.
pub const MIN_SERIES_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictParams {
    /// Quantile of the vertex-count forecast.
    pub gamma: f64,
    /// Quantile of the degree and edge-count forecasts.
    pub u: f64,
    /// Objective weight of edges not yet present.
    pub alpha: f64,
    /// Attachment partners per new vertex.
    pub k: usize,
    pub h: usize,
}

impl Default for PredictParams {
    fn default() -> Self {
        PredictParams {
            gamma: 0.5,
            u: 0.8,
            alpha: DEFAULT_ALPHA,
            k: 10,
            h: 1,
        }
    }
}

impl PredictParams {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.gamma) {
            return Err(Error::OutOfRange(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if !open_unit(self.u) {
            return Err(Error::OutOfRange(format!("u {} outside (0, 1)", self.u)));
        }
        if !open_unit(self.alpha) {
            return Err(Error::OutOfRange(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.k < 1 {
            return Err(Error::OutOfRange("k must be at least 1".into()));
        }
        if self.h < 1 {
            return Err(Error::OutOfRange("horizon must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_horizon(self, h: usize) -> Self {
        PredictParams { h, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Relaxation optimum, or `None` if the simplex hit its iteration cap.
    pub lp_objective: Option<f64>,
    pub ilp_objective: f64,
    pub candidate_count: usize,
    pub n_hat: usize,
    pub nodes_explored: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedGraph {
    pub graph: Graph,
    pub params: PredictParams,
    /// Index of the last observed snapshot.
    pub horizon_origin: usize,
    /// Degree bound of every vertex of the prediction.
    pub degree_bounds: BTreeMap<VertexId, f64>,
    pub edge_bound: f64,
    pub diagnostics: Diagnostics,
}

/// Holds every forecast a series needs so that several horizons and
/// parameter cells can share the model fits.
#[derive(Debug, Clone)]
pub struct Predictor<'a> {
    series: &'a GraphSeries,
    forecasts: SeriesForecasts,
}

impl<'a> Predictor<'a> {
    pub fn new(series: &'a GraphSeries) -> Result<Self> {
        if series.len() < MIN_SERIES_LEN {
            return Err(Error::SeriesTooShort {
                len: series.len(),
                needed: MIN_SERIES_LEN,
            });
        }
        Ok(Predictor {
            series,
            forecasts: SeriesForecasts::new(series)?,
        })
    }

    pub fn forecasts(&self) -> &SeriesForecasts {
        &self.forecasts
    }

    pub fn hypothetical(&self, params: &PredictParams) -> Result<HypotheticalGraph> {
        params.validate()?;
        let (n_hat, _) = vertex_count_from(
            &self.forecasts.vertex_count,
            self.forecasts.n_last,
            params.h,
            params.gamma,
        )?;
        Ok(hypothetical_from(self.series.last(), n_hat, params.k, None))
    }

    pub fn system(&self, params: &PredictParams) -> Result<(HypotheticalGraph, ConstraintSystem)> {
        let hyp = self.hypothetical(params)?;
        let cs = assemble_with(&self.forecasts, &hyp, params.h, params.u, params.u, params.alpha)?;
        Ok((hyp, cs))
    }

    pub fn predict(&self, params: &PredictParams) -> Result<PredictedGraph> {
        let (hyp, cs) = self.system(params)?;
        let ilp = solve_ilp(&cs)?;

        let layout = hyp.row_layout();
        let edges = ilp.selected().map(|j| hyp.candidates[j].edge);
        let graph = Graph::new(layout.iter().copied(), edges)?;
        let degree_bounds = layout
            .into_iter()
            .zip(cs.upper_bounds.iter().copied())
            .collect();

        Ok(PredictedGraph {
            graph,
            params: *params,
            horizon_origin: self.series.len(),
            degree_bounds,
            edge_bound: *cs.upper_bounds.last().expect("total-edge row"),
            diagnostics: Diagnostics {
                lp_objective: ilp.root_lp_objective,
                ilp_objective: ilp.objective,
                candidate_count: cs.cols(),
                n_hat: hyp.n_hat,
                nodes_explored: ilp.nodes_explored,
            },
        })
    }

    /// One prediction per `(gamma, u)` cell, row-major over `gammas`.
    pub fn distribution(
        &self,
        gammas: &[f64],
        us: &[f64],
        base: &PredictParams,
    ) -> Result<Vec<PredictedGraph>> {
        if gammas.is_empty() || us.is_empty() {
            return Err(Error::OutOfRange("empty parameter grid".into()));
        }
        let cells: Vec<PredictParams> = gammas
            .iter()
            .flat_map(|&gamma| us.iter().map(move |&u| PredictParams { gamma, u, ..*base }))
            .collect();

        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            cells.par_iter().map(|p| self.predict(p)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            cells.iter().map(|p| self.predict(p)).collect()
        }
    }
}

pub fn predict(series: &GraphSeries, params: &PredictParams) -> Result<PredictedGraph> {
    params.validate()?;
    Predictor::new(series)?.predict(params)
}

pub fn predict_distribution(
    series: &GraphSeries,
    gammas: &[f64],
    us: &[f64],
    alpha: f64,
    k: usize,
    h: usize,
) -> Result<Vec<PredictedGraph>> {
    let base = PredictParams {
        alpha,
        k,
        h,
        ..PredictParams::default()
    };
    Predictor::new(series)?.distribution(gammas, us, &base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::Provenance;
    use crate::graph::Edge;
    use crate::solver::brute_force;

    fn e(a: u64, b: u64) -> Edge {
        Edge::new(a, b).unwrap()
    }

    fn triangle_series() -> GraphSeries {
        let tri = Graph::from_edges([e(0, 1), e(0, 2), e(1, 2)]);
        GraphSeries::new(vec![tri; 6]).unwrap()
    }

    #[test]
    fn constant_triangle_is_reproduced() {
        let params = PredictParams {
            gamma: 0.5,
            u: 0.5,
            ..PredictParams::default()
        };
        let p = predict(&triangle_series(), &params).unwrap();
        assert_eq!(p.graph, triangle_series().last().clone());
        assert_eq!(p.diagnostics.n_hat, 3);
        assert_eq!(p.diagnostics.ilp_objective, 3.0);
        assert_eq!(p.horizon_origin, 6);
    }

    #[test]
    fn shrinking_degree_drops_an_existing_edge() {
        // Vertex 0 loses one spoke per snapshot: degrees 5, 4, 3, 2, 1.
        let spokes = [1u64, 2, 3, 4, 5];
        let snaps: Vec<Graph> = (0..5)
            .map(|t| {
                let mut edges: Vec<Edge> = spokes.iter().skip(t).map(|s| e(0, *s)).collect();
                edges.extend([e(1, 2), e(3, 4), e(2, 5), e(4, 5)]);
                Graph::new((0..6).map(VertexId), edges).unwrap()
            })
            .collect();
        let series = GraphSeries::new(snaps).unwrap();
        let params = PredictParams::default();
        let pred = Predictor::new(&series).unwrap();
        let (hyp, cs) = pred.system(&params).unwrap();
        let out = pred.predict(&params).unwrap();

        let candidates: std::collections::BTreeSet<Edge> = hyp.candidate_edges().into_iter().collect();
        assert!(out.graph.edges().all(|ed| candidates.contains(&ed)));
        assert!(series.last().contains_edge(&e(0, 5)));
        assert_eq!(out.graph.degree(VertexId(0)).unwrap(), 0);
        assert_eq!(brute_force(&cs).unwrap().objective, out.diagnostics.ilp_objective);
    }

    #[test]
    fn no_growth_means_no_attachment() {
        let params = PredictParams::default();
        let series = triangle_series();
        let pred = Predictor::new(&series).unwrap();
        let hyp = pred.hypothetical(&params).unwrap();
        assert_eq!(hyp.count(Provenance::Attachment), 0);
        assert_eq!(pred.predict(&params).unwrap().graph.vertex_count(), 3);
    }

    #[test]
    fn distribution_is_row_major() {
        let s = triangle_series();
        let one = predict_distribution(&s, &[0.5], &[0.5], 1e-3, 10, 1).unwrap();
        let direct = predict(
            &s,
            &PredictParams {
                gamma: 0.5,
                u: 0.5,
                ..PredictParams::default()
            },
        )
        .unwrap();
        assert_eq!(one, vec![direct]);

        let grid = predict_distribution(&s, &[0.3, 0.7], &[0.2, 0.5, 0.9], 1e-3, 10, 2).unwrap();
        let order: Vec<(f64, f64)> = grid.iter().map(|p| (p.params.gamma, p.params.u)).collect();
        assert_eq!(
            order,
            vec![(0.3, 0.2), (0.3, 0.5), (0.3, 0.9), (0.7, 0.2), (0.7, 0.5), (0.7, 0.9)]
        );
    }

    #[test]
    fn parameter_validation() {
        let s = triangle_series();
        for bad in [
            PredictParams { gamma: 1.0, ..PredictParams::default() },
            PredictParams { u: 0.0, ..PredictParams::default() },
            PredictParams { alpha: 1.5, ..PredictParams::default() },
            PredictParams { k: 0, ..PredictParams::default() },
            PredictParams { h: 0, ..PredictParams::default() },
        ] {
            assert!(matches!(predict(&s, &bad), Err(Error::OutOfRange(_))));
        }
        let short = GraphSeries::new(vec![Graph::default(); 3]).unwrap();
        assert!(matches!(
            predict(&short, &PredictParams::default()),
            Err(Error::SeriesTooShort { .. })
        ));
    }
}
