//! Graph snapshots, growing series of snapshots, and incidence matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::Series;

/// Vertex identifier, stable across every snapshot of a series.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for VertexId {
    fn from(v: u64) -> Self {
        VertexId(v)
    }
}

/// Undirected edge stored with its endpoints in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    /// `None` for self-loops.
    pub fn new(u: impl Into<VertexId>, v: impl Into<VertexId>) -> Option<Self> {
        let (u, v) = (u.into(), v.into());
        match u.cmp(&v) {
            std::cmp::Ordering::Less => Some(Edge(u, v)),
            std::cmp::Ordering::Greater => Some(Edge(v, u)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn low(&self) -> VertexId {
        self.0
    }

    pub fn high(&self) -> VertexId {
        self.1
    }

    pub fn endpoints(&self) -> [VertexId; 2] {
        [self.0, self.1]
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Immutable undirected, unweighted, loop-free graph.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Graph {
    adjacency: BTreeMap<VertexId, BTreeSet<VertexId>>,
    edges: BTreeSet<Edge>,
}

impl Graph {
    /// Builds a graph from a vertex set and edges. Endpoints missing from
    /// `vertices` are an error; duplicate edges collapse.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut adjacency: BTreeMap<VertexId, BTreeSet<VertexId>> =
            vertices.into_iter().map(|v| (v, BTreeSet::new())).collect();
        let mut set = BTreeSet::new();
        for e in edges {
            for v in e.endpoints() {
                if !adjacency.contains_key(&v) {
                    return Err(Error::InvalidGraph(format!(
                        "edge {e} references vertex {v} outside the vertex set"
                    )));
                }
            }
            if set.insert(e) {
                adjacency.get_mut(&e.0).unwrap().insert(e.1);
                adjacency.get_mut(&e.1).unwrap().insert(e.0);
            }
        }
        Ok(Graph {
            adjacency,
            edges: set,
        })
    }

    /// Graph whose vertex set is exactly the edge endpoints.
    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Self {
        let edges: Vec<Edge> = edges.into_iter().collect();
        let vertices: BTreeSet<VertexId> = edges.iter().flat_map(|e| e.endpoints()).collect();
        Graph::new(vertices, edges).expect("endpoints are in the vertex set")
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.adjacency.keys().copied().collect()
    }

    /// Edges in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.adjacency.contains_key(&v)
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    pub fn neighbours(&self, v: VertexId) -> Result<&BTreeSet<VertexId>> {
        self.adjacency.get(&v).ok_or(Error::UnknownVertex(v))
    }

    pub fn degree(&self, v: VertexId) -> Result<usize> {
        self.neighbours(v).map(BTreeSet::len)
    }

    pub fn max_vertex_id(&self) -> Option<VertexId> {
        self.adjacency.keys().next_back().copied()
    }
}

/// Ordered snapshots of a growing graph (`V_t` is a subset of `V_{t+1}`).
/// Edges may disappear between snapshots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSeries {
    snapshots: Vec<Graph>,
    first_seen: BTreeMap<VertexId, usize>,
}

impl GraphSeries {
    pub fn new(snapshots: Vec<Graph>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InvalidGraph("a series needs at least one snapshot".into()));
        }
        let mut first_seen = BTreeMap::new();
        for (i, g) in snapshots.iter().enumerate() {
            if i > 0 {
                if let Some(v) = snapshots[i - 1].vertices().find(|v| !g.contains_vertex(*v)) {
                    return Err(Error::VertexRemoved(v));
                }
            }
            for v in g.vertices() {
                first_seen.entry(v).or_insert(i + 1);
            }
        }
        Ok(GraphSeries {
            snapshots,
            first_seen,
        })
    }

    /// Number of snapshots, `T`.
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Graph] {
        &self.snapshots
    }

    /// Snapshot at 1-based time index `t`.
    pub fn snapshot(&self, t: usize) -> Result<&Graph> {
        if t == 0 || t > self.len() {
            return Err(Error::OutOfRange(format!("time index {t} outside 1..={}", self.len())));
        }
        Ok(&self.snapshots[t - 1])
    }

    pub fn last(&self) -> &Graph {
        self.snapshots.last().expect("series is non-empty")
    }

    pub fn first_seen(&self, v: VertexId) -> Option<usize> {
        self.first_seen.get(&v).copied()
    }

    /// Snapshots `from..=to` (1-based, inclusive) as a new series; time
    /// indices restart at 1.
    pub fn window(&self, from: usize, to: usize) -> Result<GraphSeries> {
        if from == 0 || from > to || to > self.len() {
            return Err(Error::OutOfRange(format!(
                "window {from}..={to} outside 1..={}",
                self.len()
            )));
        }
        GraphSeries::new(self.snapshots[from - 1..to].to_vec())
    }

    pub fn vertex_counts(&self) -> Series {
        Series::from_values(self.snapshots.iter().map(|g| g.vertex_count() as f64).collect())
            .expect("non-empty")
    }

    pub fn edge_counts(&self) -> Series {
        Series::from_values(self.snapshots.iter().map(|g| g.edge_count() as f64).collect())
            .expect("non-empty")
    }

    /// Degrees of `v` from the snapshot where it first appears through `T`.
    pub fn degree_series(&self, v: VertexId) -> Result<Series> {
        let t0 = self.first_seen(v).ok_or(Error::UnknownVertex(v))?;
        let values = self.snapshots[t0 - 1..]
            .iter()
            .map(|g| g.degree(v).map(|d| d as f64))
            .collect::<Result<Vec<_>>>()?;
        Series::new(values, t0)
    }

    /// `V_t \ V_{t-1}` for `1 < t <= T`.
    pub fn t_new_vertices(&self, t: usize) -> Result<BTreeSet<VertexId>> {
        if t < 2 || t > self.len() {
            return Err(Error::OutOfRange(format!("time index {t} outside 2..={}", self.len())));
        }
        let prev = &self.snapshots[t - 2];
        Ok(self.snapshots[t - 1]
            .vertices()
            .filter(|v| !prev.contains_vertex(*v))
            .collect())
    }

    /// Degrees of t-new vertices (in the snapshot where they are new) for
    /// `1 < t <= t_end`, and their mean (0 for an empty pool).
    pub fn new_vertex_degree_pool(&self, t_end: usize) -> (Vec<usize>, f64) {
        let mut pool = Vec::new();
        for t in 2..=t_end.min(self.len()) {
            let g = &self.snapshots[t - 1];
            for v in self.t_new_vertices(t).expect("t in range") {
                pool.push(g.degree(v).expect("vertex in snapshot"));
            }
        }
        let mean = if pool.is_empty() {
            0.0
        } else {
            pool.iter().sum::<usize>() as f64 / pool.len() as f64
        };
        (pool, mean)
    }
}

/// Sparse 0/1 incidence matrix with exactly two entries per column.
///
/// Row `r < row_ids.len()` belongs to `row_ids[r]`; any further rows are
/// padding (all zero).
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    rows: usize,
    row_ids: Vec<VertexId>,
    col_edges: Vec<Edge>,
    col_rows: Vec<[usize; 2]>,
}

impl IncidenceMatrix {
    /// Rows follow `row_ids` then `row_count - row_ids.len()` padding rows;
    /// one column per edge in the given order.
    pub fn from_edges(row_ids: Vec<VertexId>, row_count: usize, edges: &[Edge]) -> Result<Self> {
        if row_count < row_ids.len() {
            return Err(Error::OutOfRange(format!(
                "row count {row_count} below vertex count {}",
                row_ids.len()
            )));
        }
        let index: BTreeMap<VertexId, usize> =
            row_ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let col_rows = edges
            .iter()
            .map(|e| {
                let a = *index.get(&e.low()).ok_or(Error::UnknownVertex(e.low()))?;
                let b = *index.get(&e.high()).ok_or(Error::UnknownVertex(e.high()))?;
                Ok([a, b])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(IncidenceMatrix {
            rows: row_count,
            row_ids,
            col_edges: edges.to_vec(),
            col_rows,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_edges.len()
    }

    pub fn row_ids(&self) -> &[VertexId] {
        &self.row_ids
    }

    pub fn col_edges(&self) -> &[Edge] {
        &self.col_edges
    }

    /// The two row indices of column `j`.
    pub fn col_rows(&self, j: usize) -> [usize; 2] {
        self.col_rows[j]
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        u8::from(self.col_rows[c].contains(&r))
    }

    pub fn row_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.rows];
        for [a, b] in &self.col_rows {
            sums[*a] += 1;
            sums[*b] += 1;
        }
        sums
    }

    pub fn col_sums(&self) -> Vec<usize> {
        vec![2; self.cols()]
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut m = vec![vec![0; self.cols()]; self.rows];
        for (j, [a, b]) in self.col_rows.iter().enumerate() {
            m[*a][j] = 1;
            m[*b][j] = 1;
        }
        m
    }
}

/// Incidence matrix of `graph` with rows in ascending vertex id order,
/// padded with zero rows up to `row_count`.
pub fn incidence_matrix(graph: &Graph, row_count: usize) -> Result<IncidenceMatrix> {
    let edges: Vec<Edge> = graph.edges().collect();
    IncidenceMatrix::from_edges(graph.vertices().collect(), row_count, &edges)
}
