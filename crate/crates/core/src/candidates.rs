//! The hypothetical graph: the last snapshot plus forecast new vertices and
//! every candidate edge the optimiser may select.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, GraphSeries, VertexId};
use crate::timeseries::Forecaster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    /// Present in the last observed snapshot.
    Existing,
    /// Between two existing vertices that share a neighbour.
    Homophily,
    /// Between a new vertex and one of the most popular existing vertices.
    Attachment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateEdge {
    pub edge: Edge,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypotheticalGraph {
    pub base: Graph,
    /// Forecast vertex count, rounded and clamped at zero.
    pub n_hat: usize,
    pub new_vertices: Vec<VertexId>,
    pub candidates: Vec<CandidateEdge>,
    /// `max(n_T, n_hat)`.
    pub total_vertices: usize,
}

impl HypotheticalGraph {
    pub fn new_vertex_count(&self) -> usize {
        self.new_vertices.len()
    }

    /// Existing vertices ascending, then the new vertices.
    pub fn row_layout(&self) -> Vec<VertexId> {
        self.base.vertices().chain(self.new_vertices.iter().copied()).collect()
    }

    pub fn candidate_edges(&self) -> Vec<Edge> {
        self.candidates.iter().map(|c| c.edge).collect()
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.candidates.iter().filter(|c| c.provenance == provenance).count()
    }
}

/// Rounds half up and clamps at zero.
pub fn round_count(x: f64) -> usize {
    let r = (x + 0.5).floor();
    if r.is_finite() && r > 0.0 {
        r as usize
    } else {
        0
    }
}

/// Forecast vertex count `n_hat` at quantile `gamma`, and the number of new
/// vertices `max(n_hat - n_T, 0)`.
pub fn predict_vertex_count(series: &GraphSeries, h: usize, gamma: f64) -> Result<(usize, usize)> {
    let forecaster = Forecaster::new(series.vertex_counts());
    vertex_count_from(&forecaster, series.last().vertex_count(), h, gamma)
}

pub(crate) fn vertex_count_from(
    forecaster: &Forecaster,
    n_last: usize,
    h: usize,
    gamma: f64,
) -> Result<(usize, usize)> {
    if h < 1 {
        return Err(Error::OutOfRange("horizon must be at least 1".into()));
    }
    let n_hat = round_count(forecaster.quantile(h, gamma)?);
    Ok((n_hat, n_hat.saturating_sub(n_last)))
}

/// Every non-adjacent pair sharing at least one neighbour, in lexicographic
/// order. `cap` truncates the list when set.
pub fn homophily_candidates(g: &Graph, cap: Option<usize>) -> Vec<CandidateEdge> {
    let mut out = Vec::new();
    for u in g.vertices() {
        let nu = g.neighbours(u).expect("vertex of g");
        let mut reach: BTreeSet<VertexId> = BTreeSet::new();
        for w in nu {
            for x in g.neighbours(*w).expect("vertex of g") {
                if *x > u && !nu.contains(x) {
                    reach.insert(*x);
                }
            }
        }
        for x in reach {
            if cap.is_some_and(|c| out.len() >= c) {
                return out;
            }
            out.push(CandidateEdge {
                edge: Edge::new(u, x).expect("u < x"),
                provenance: Provenance::Homophily,
            });
        }
    }
    out
}

/// The `min(k, n)` highest-degree vertices, ties broken by ascending id.
pub fn most_popular(g: &Graph, k: usize) -> Vec<VertexId> {
    let mut by_degree: Vec<(usize, VertexId)> = g
        .vertices()
        .map(|v| (g.degree(v).expect("vertex of g"), v))
        .collect();
    by_degree.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    by_degree.into_iter().take(k).map(|(_, v)| v).collect()
}

/// Fresh vertices `next_id, next_id + 1, ...`, each paired with the most
/// popular vertices of `g`.
pub fn attachment_candidates(
    g: &Graph,
    n_new: usize,
    k: usize,
    next_id: VertexId,
) -> Vec<CandidateEdge> {
    let partners = most_popular(g, k);
    let mut out = Vec::with_capacity(n_new * partners.len());
    for i in 0..n_new as u64 {
        let fresh = VertexId(next_id.0 + i);
        for p in &partners {
            out.push(CandidateEdge {
                edge: Edge::new(fresh, *p).expect("fresh id differs from existing ids"),
                provenance: Provenance::Attachment,
            });
        }
    }
    out
}

/// First id after every existing vertex.
pub fn next_vertex_id(g: &Graph) -> VertexId {
    g.max_vertex_id().map_or(VertexId(0), |v| VertexId(v.0 + 1))
}

/// Builds the hypothetical graph from the last snapshot and a forecast
/// vertex count.
pub fn hypothetical_from(
    base: &Graph,
    n_hat: usize,
    k: usize,
    homophily_cap: Option<usize>,
) -> HypotheticalGraph {
    let n_t = base.vertex_count();
    let n_new = n_hat.saturating_sub(n_t);
    let next = next_vertex_id(base);
    let new_vertices: Vec<VertexId> = (0..n_new as u64).map(|i| VertexId(next.0 + i)).collect();

    let mut candidates: Vec<CandidateEdge> = base
        .edges()
        .map(|edge| CandidateEdge {
            edge,
            provenance: Provenance::Existing,
        })
        .collect();
    candidates.extend(homophily_candidates(base, homophily_cap));
    candidates.extend(attachment_candidates(base, n_new, k, next));

    HypotheticalGraph {
        base: base.clone(),
        n_hat,
        new_vertices,
        candidates,
        total_vertices: n_t.max(n_hat),
    }
}

pub fn build_hypothetical(
    series: &GraphSeries,
    h: usize,
    gamma: f64,
    k: usize,
) -> Result<HypotheticalGraph> {
    if k < 1 {
        return Err(Error::OutOfRange("k must be at least 1".into()));
    }
    let (n_hat, _) = predict_vertex_count(series, h, gamma)?;
    Ok(hypothetical_from(series.last(), n_hat, k, None))
}
