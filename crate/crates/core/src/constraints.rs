//! Assembly of the 0/1 program: incidence rows with per-vertex degree
//! bounds, a final all-ones row bounded by the forecast edge total, and
//! objective weights favouring edges already present.

use std::collections::BTreeMap;

use crate::candidates::{CandidateEdge, HypotheticalGraph, Provenance};
use crate::error::{Error, Result};
use crate::graph::{GraphSeries, IncidenceMatrix, VertexId};
use crate::timeseries::Forecaster;

/// Default weight for candidate edges not present in the last snapshot.
pub const DEFAULT_ALPHA: f64 = 1e-3;

/// Column-major sparse matrix with non-negative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        SparseMatrix { rows, columns }
    }

    /// Incidence rows followed by one all-ones row.
    pub fn from_incidence_with_total(m: &IncidenceMatrix) -> Self {
        let total_row = m.rows();
        let columns = (0..m.cols())
            .map(|j| {
                let [a, b] = m.col_rows(j);
                vec![(a, 1.0), (b, 1.0), (total_row, 1.0)]
            })
            .collect();
        SparseMatrix {
            rows: m.rows() + 1,
            columns,
        }
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Self {
        let rows = dense.len();
        let cols = dense.first().map_or(0, Vec::len);
        let columns = (0..cols)
            .map(|j| {
                (0..rows)
                    .filter(|&i| dense[i][j] != 0.0)
                    .map(|i| (i, dense[i][j]))
                    .collect()
            })
            .collect();
        SparseMatrix { rows, columns }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j]
            .iter()
            .find(|(r, _)| *r == i)
            .map_or(0.0, |(_, v)| *v)
    }

    /// `A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (col, xj) in self.columns.iter().zip(x) {
            if *xj != 0.0 {
                for (i, a) in col {
                    out[*i] += a * xj;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols()]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                d[*i][j] = *v;
            }
        }
        d
    }
}

/// `max objective . x` subject to `0 <= matrix x <= upper_bounds` and
/// `x` in `{0,1}` (or `[0,1]` for the relaxation).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub matrix: SparseMatrix,
    pub upper_bounds: Vec<f64>,
    pub objective: Vec<f64>,
    /// Column index to candidate edge; empty for systems not built from a
    /// hypothetical graph.
    pub candidates: Vec<CandidateEdge>,
}

impl ConstraintSystem {
    pub fn new(matrix: SparseMatrix, upper_bounds: Vec<f64>, objective: Vec<f64>) -> Self {
        ConstraintSystem {
            matrix,
            upper_bounds,
            objective,
            candidates: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Shape, sign and finiteness checks shared by every solver.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedSystem(m));
        if self.upper_bounds.len() != self.rows() {
            return bad(format!(
                "{} bounds for {} rows",
                self.upper_bounds.len(),
                self.rows()
            ));
        }
        if self.objective.len() != self.cols() {
            return bad(format!(
                "{} objective entries for {} columns",
                self.objective.len(),
                self.cols()
            ));
        }
        if !self.candidates.is_empty() && self.candidates.len() != self.cols() {
            return bad("candidate map does not cover every column".into());
        }
        if let Some(b) = self.upper_bounds.iter().find(|b| !b.is_finite() || **b < 0.0) {
            return bad(format!("upper bound {b} is negative or not finite"));
        }
        if let Some(c) = self.objective.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return bad(format!("objective coefficient {c} is negative or not finite"));
        }
        for j in 0..self.cols() {
            for (i, a) in self.matrix.column(j) {
                if *i >= self.rows() {
                    return bad(format!("column {j} references row {i}"));
                }
                if !a.is_finite() || *a < 0.0 {
                    return bad(format!("entry ({i},{j}) = {a} is negative or not finite"));
                }
            }
        }
        Ok(())
    }

    /// Whether `x` satisfies every row within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.cols()
            && self
                .matrix
                .mul(x)
                .iter()
                .zip(&self.upper_bounds)
                .all(|(ax, f)| *ax >= -tol && *ax <= f + tol)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Fitted models for one training series, reusable for every horizon and
/// quantile: the vertex count, the edge count, each vertex's degree, and the
/// mean degree of newly arrived vertices.
#[derive(Debug, Clone)]
pub struct SeriesForecasts {
    pub n_last: usize,
    pub vertex_count: Forecaster,
    pub edge_count: Forecaster,
    pub degrees: BTreeMap<VertexId, Forecaster>,
    pub new_vertex_mean: f64,
}

impl SeriesForecasts {
    pub fn new(series: &GraphSeries) -> Result<Self> {
        let last = series.last();
        let vertices: Vec<VertexId> = last.vertices().collect();
        let degree_series = vertices
            .iter()
            .map(|v| series.degree_series(*v))
            .collect::<Result<Vec<_>>>()?;

        #[cfg(feature = "parallel")]
        let fitted: Vec<Forecaster> = {
            use rayon::prelude::*;
            degree_series.into_par_iter().map(Forecaster::new).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let fitted: Vec<Forecaster> = degree_series.into_iter().map(Forecaster::new).collect();

        Ok(SeriesForecasts {
            n_last: last.vertex_count(),
            vertex_count: Forecaster::new(series.vertex_counts()),
            edge_count: Forecaster::new(series.edge_counts()),
            degrees: vertices.into_iter().zip(fitted).collect(),
            new_vertex_mean: series.new_vertex_degree_pool(series.len()).1,
        })
    }

    /// Degree bounds in the row layout of `hyp`: existing vertices ascending,
    /// then one entry per new vertex.
    pub fn degree_bounds(&self, hyp: &HypotheticalGraph, h: usize, u: f64) -> Result<Vec<f64>> {
        check_quantile(u)?;
        let mut bounds = Vec::with_capacity(hyp.total_vertices);
        for v in hyp.base.vertices() {
            let f = self.degrees.get(&v).ok_or(Error::UnknownVertex(v))?;
            bounds.push(f.quantile(h, u)?.max(0.0));
        }
        bounds.extend(std::iter::repeat_n(self.new_vertex_mean, hyp.new_vertex_count()));
        Ok(bounds)
    }

    pub fn total_edge_bound(&self, h: usize, u: f64) -> Result<f64> {
        check_quantile(u)?;
        Ok(self.edge_count.quantile(h, u)?.max(0.0))
    }
}

fn check_quantile(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("quantile {u} outside (0, 1)")))
    }
}

/// Per-vertex degree bounds for the rows of `hyp`.
pub fn degree_bounds(
    series: &GraphSeries,
    hyp: &HypotheticalGraph,
    h: usize,
    u: f64,
) -> Result<Vec<f64>> {
    SeriesForecasts::new(series)?.degree_bounds(hyp, h, u)
}

/// Quantile `u` of the forecast edge count, clamped at zero.
pub fn total_edge_bound(series: &GraphSeries, h: usize, u: f64) -> Result<f64> {
    check_quantile(u)?;
    Ok(Forecaster::new(series.edge_counts()).quantile(h, u)?.max(0.0))
}

/// 1 for edges already present, `alpha` for every other candidate.
pub fn objective_coeffs(hyp: &HypotheticalGraph, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(hyp
        .candidates
        .iter()
        .map(|c| match c.provenance {
            Provenance::Existing => 1.0,
            Provenance::Homophily | Provenance::Attachment => alpha,
        })
        .collect())
}

/// Assembles the system from precomputed bounds.
pub fn assemble_from_bounds(
    hyp: &HypotheticalGraph,
    degree_bounds: Vec<f64>,
    total_bound: f64,
    alpha: f64,
) -> Result<ConstraintSystem> {
    let layout = hyp.row_layout();
    if degree_bounds.len() != layout.len() {
        return Err(Error::MalformedSystem(format!(
            "{} degree bounds for {} vertices",
            degree_bounds.len(),
            layout.len()
        )));
    }
    let incidence =
        IncidenceMatrix::from_edges(layout, hyp.total_vertices, &hyp.candidate_edges())?;
    let mut upper_bounds = degree_bounds;
    upper_bounds.push(total_bound);
    Ok(ConstraintSystem {
        matrix: SparseMatrix::from_incidence_with_total(&incidence),
        upper_bounds,
        objective: objective_coeffs(hyp, alpha)?,
        candidates: hyp.candidates.clone(),
    })
}

/// Separate quantiles for the degree rows and the total-edge row.
pub fn assemble_with(
    forecasts: &SeriesForecasts,
    hyp: &HypotheticalGraph,
    h: usize,
    u_degree: f64,
    u_edges: f64,
    alpha: f64,
) -> Result<ConstraintSystem> {
    let bounds = forecasts.degree_bounds(hyp, h, u_degree)?;
    let total = forecasts.total_edge_bound(h, u_edges)?;
    assemble_from_bounds(hyp, bounds, total, alpha)
}

pub fn assemble(
    series: &GraphSeries,
    hyp: &HypotheticalGraph,
    h: usize,
    u: f64,
    alpha: f64,
) -> Result<ConstraintSystem> {
    let forecasts = SeriesForecasts::new(series)?;
    assemble_with(&forecasts, hyp, h, u, u, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::hypothetical_from;
    use crate::graph::{Edge, Graph};

    fn e(a: u64, b: u64) -> Edge {
        Edge::new(a, b).unwrap()
    }

    #[test]
    fn objective_examples() {
        let path = Graph::from_edges([e(1, 2), e(2, 3)]);
        let hyp = hypothetical_from(&path, 4, 2, None);
        assert_eq!(
            objective_coeffs(&hyp, 1e-3).unwrap(),
            vec![1.0, 1.0, 1e-3, 1e-3, 1e-3]
        );
        let tri = Graph::from_edges([e(1, 2), e(1, 3), e(2, 3)]);
        let hyp = hypothetical_from(&tri, 3, 2, None);
        assert_eq!(objective_coeffs(&hyp, 1e-3).unwrap(), vec![1.0; 3]);
        assert!(objective_coeffs(&hyp, 0.0).is_err());
        assert!(objective_coeffs(&hyp, 1.0).is_err());
        assert_eq!(DEFAULT_ALPHA, 1e-3);
    }

    #[test]
    fn constant_degree_bound_is_exact() {
        let tri = Graph::from_edges([e(1, 2), e(1, 3), e(2, 3)]);
        let s = GraphSeries::new(vec![tri.clone(); 6]).unwrap();
        let hyp = hypothetical_from(&tri, 3, 10, None);
        let b = degree_bounds(&s, &hyp, 1, 0.8).unwrap();
        for x in b {
            assert!((x - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ramp_degree_bound_extrapolates() {
        // Vertex 0 gains one leaf per snapshot: degrees 1..=10.
        let snaps: Vec<Graph> = (1..=10u64)
            .map(|t| Graph::from_edges((1..=t).map(|j| e(0, j))))
            .collect();
        let s = GraphSeries::new(snaps).unwrap();
        let hyp = hypothetical_from(s.last(), 0, 10, None);
        let b = degree_bounds(&s, &hyp, 1, 0.5).unwrap();
        assert!((b[0] - 11.0).abs() < 0.5, "{}", b[0]);
    }

    #[test]
    fn new_vertices_get_pool_mean() {
        // New vertices of degree 2, 3 and 4 arrive at t = 2, 3, 4.
        let mut edges = vec![e(0, 1), e(1, 2), e(2, 3), e(3, 4), e(4, 5)];
        let mut snaps = vec![Graph::from_edges(edges.clone())];
        for (new, partners) in [(10u64, vec![0u64, 1]), (11, vec![0, 1, 2]), (12, vec![0, 1, 2, 3])] {
            edges.extend(partners.iter().map(|p| e(new, *p)));
            snaps.push(Graph::from_edges(edges.clone()));
        }
        let s = GraphSeries::new(snaps).unwrap();
        let f = SeriesForecasts::new(&s).unwrap();
        assert!((f.new_vertex_mean - 3.0).abs() < 1e-12);
        let hyp = hypothetical_from(s.last(), s.last().vertex_count() + 2, 3, None);
        let b = f.degree_bounds(&hyp, 1, 0.8).unwrap();
        assert_eq!(&b[b.len() - 2..], &[3.0, 3.0]);
    }

    #[test]
    fn total_edge_bound_examples() {
        let g = |m: u64| Graph::from_edges((1..=m).map(|j| e(0, j)));
        let s = GraphSeries::new((0..8).map(|_| g(50)).collect()).unwrap();
        assert!((total_edge_bound(&s, 2, 0.9).unwrap() - 50.0).abs() < 1e-9);

        let s = GraphSeries::new((0..15).map(|i| g(10 + 2 * i)).collect()).unwrap();
        assert!((total_edge_bound(&s, 1, 0.5).unwrap() - 40.0).abs() < 0.5);

        let shrinking = |m: u64| Graph::new((0..=50).map(VertexId), (1..=m).map(|j| e(0, j))).unwrap();
        let s = GraphSeries::new((0..6).map(|i| shrinking(50 - 9 * i)).collect()).unwrap();
        assert_eq!(total_edge_bound(&s, 5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn assemble_shapes() {
        let path = Graph::from_edges([e(1, 2), e(2, 3)]);
        let s = GraphSeries::new(vec![path.clone(); 5]).unwrap();
        let hyp = hypothetical_from(&path, 4, 2, None);
        let cs = assemble(&s, &hyp, 1, 0.8, 1e-3).unwrap();
        assert_eq!(cs.rows(), 5);
        assert_eq!(cs.cols(), 5);
        assert_eq!(cs.upper_bounds.len(), 5);
        let dense = cs.matrix.to_dense();
        assert_eq!(dense[4], vec![1.0; 5]);
        for j in 0..cs.cols() {
            let s: f64 = dense[..4].iter().map(|row| row[j]).sum();
            assert_eq!(s, 2.0);
        }
        cs.validate().unwrap();
        assert!(cs.is_feasible(&[0.0; 5], 0.0));
    }

    #[test]
    fn assemble_empty_system() {
        let g = Graph::default();
        let hyp = hypothetical_from(&g, 0, 10, None);
        let cs = assemble_from_bounds(&hyp, vec![], 0.0, 1e-3).unwrap();
        assert_eq!(cs.cols(), 0);
        assert_eq!(cs.rows(), 1);
    }

    #[test]
    fn validate_catches_malformed_systems() {
        let m = SparseMatrix::from_dense(&[vec![1.0, -1.0]]);
        let cs = ConstraintSystem::new(m, vec![1.0], vec![1.0, 1.0]);
        assert!(matches!(cs.validate(), Err(Error::MalformedSystem(_))));
        let m = SparseMatrix::from_dense(&[vec![1.0]]);
        let cs = ConstraintSystem::new(m, vec![1.0, 2.0], vec![1.0]);
        assert!(cs.validate().is_err());
        let m = SparseMatrix::from_dense(&[vec![1.0]]);
        let cs = ConstraintSystem::new(m, vec![-1.0], vec![1.0]);
        assert!(cs.validate().is_err());
    }
}
