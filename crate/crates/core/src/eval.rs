//! Count-based error metrics, per-horizon reports and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const CSV_HEADER: &str =
    "dataset,experiment,h,method,vertex_error,edge_error,reduction_vertex_pct,reduction_edge_pct";

fn relative_error(predicted: usize, actual: usize, what: &'static str) -> Result<f64> {
    if actual == 0 {
        return Err(Error::DivisionByZero(what));
    }
    Ok(predicted.abs_diff(actual) as f64 / actual as f64)
}

/// `|n_pred - n| / n` over vertex counts.
pub fn vertex_error(pred: &Graph, actual: &Graph) -> Result<f64> {
    relative_error(pred.vertex_count(), actual.vertex_count(), "actual graph has no vertices")
}

/// `|m_pred - m| / m` over edge counts.
pub fn edge_error(pred: &Graph, actual: &Graph) -> Result<f64> {
    relative_error(pred.edge_count(), actual.edge_count(), "actual graph has no edges")
}

/// Percentage by which `proposed` improves on `baseline`; undefined for a
/// zero baseline.
pub fn reduction_pct(proposed: f64, baseline: f64) -> Option<f64> {
    (baseline > 0.0).then(|| 100.0 * (1.0 - proposed / baseline))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub horizon: usize,
    pub vertex_error: f64,
    pub edge_error: f64,
    pub baseline_vertex_error: f64,
    pub baseline_edge_error: f64,
    pub reduction_vertex: Option<f64>,
    pub reduction_edge: Option<f64>,
}

impl EvalReport {
    pub fn new(
        horizon: usize,
        vertex_error: f64,
        edge_error: f64,
        baseline_vertex_error: f64,
        baseline_edge_error: f64,
    ) -> Self {
        EvalReport {
            horizon,
            vertex_error,
            edge_error,
            baseline_vertex_error,
            baseline_edge_error,
            reduction_vertex: reduction_pct(vertex_error, baseline_vertex_error),
            reduction_edge: reduction_pct(edge_error, baseline_edge_error),
        }
    }

    /// Scores a prediction and the last observed graph against the truth.
    pub fn score(horizon: usize, predicted: &Graph, last_seen: &Graph, actual: &Graph) -> Result<Self> {
        Ok(EvalReport::new(
            horizon,
            vertex_error(predicted, actual)?,
            edge_error(predicted, actual)?,
            vertex_error(last_seen, actual)?,
            edge_error(last_seen, actual)?,
        ))
    }
}

/// Per-horizon arithmetic means of the errors, in ascending horizon order.
/// Reductions are recomputed from the mean errors.
pub fn aggregate(reports: &[EvalReport]) -> Vec<EvalReport> {
    let mut horizons: Vec<usize> = reports.iter().map(|r| r.horizon).collect();
    horizons.sort_unstable();
    horizons.dedup();
    horizons
        .into_iter()
        .map(|h| {
            let group: Vec<&EvalReport> = reports.iter().filter(|r| r.horizon == h).collect();
            let mean = |f: fn(&EvalReport) -> f64| {
                group.iter().map(|r| f(r)).sum::<f64>() / group.len() as f64
            };
            EvalReport::new(
                h,
                mean(|r| r.vertex_error),
                mean(|r| r.edge_error),
                mean(|r| r.baseline_vertex_error),
                mean(|r| r.baseline_edge_error),
            )
        })
        .collect()
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.2}"))
}

/// Two rows per report, `last_seen` then `proposed`; reductions appear on
/// the `proposed` row only.
pub fn write_csv<W: Write>(
    dataset: &str,
    experiment: &str,
    reports: &[EvalReport],
    mut out: W,
    header: bool,
) -> Result<()> {
    if header {
        writeln!(out, "{CSV_HEADER}")?;
    }
    for r in reports {
        writeln!(
            out,
            "{dataset},{experiment},{},last_seen,{:.6},{:.6},,",
            r.horizon, r.baseline_vertex_error, r.baseline_edge_error
        )?;
        writeln!(
            out,
            "{dataset},{experiment},{},proposed,{:.6},{:.6},{},{}",
            r.horizon,
            r.vertex_error,
            r.edge_error,
            pct(r.reduction_vertex),
            pct(r.reduction_edge)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, VertexId};

    fn with_counts(n: u64, m: u64) -> Graph {
        let edges = (1..=m).map(|j| Edge::new(0, j).unwrap());
        Graph::new((0..n).map(VertexId), edges).unwrap()
    }

    #[test]
    fn vertex_error_examples() {
        assert!((vertex_error(&with_counts(105, 0), &with_counts(100, 0)).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(vertex_error(&with_counts(100, 0), &with_counts(100, 0)).unwrap(), 0.0);
        assert_eq!(vertex_error(&Graph::default(), &with_counts(100, 0)).unwrap(), 1.0);
        assert!(matches!(
            vertex_error(&with_counts(3, 0), &Graph::default()),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn edge_error_examples() {
        let actual = with_counts(201, 100);
        assert!((edge_error(&with_counts(201, 90), &actual).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(edge_error(&actual, &actual).unwrap(), 0.0);
        assert_eq!(edge_error(&with_counts(201, 200), &actual).unwrap(), 1.0);
        assert!(matches!(
            edge_error(&actual, &with_counts(5, 0)),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn reductions() {
        let r = EvalReport::new(1, 0.01, 0.02, 0.04, 0.0);
        assert!((r.reduction_vertex.unwrap() - 75.0).abs() < 1e-12);
        assert_eq!(r.reduction_edge, None);
    }

    #[test]
    fn aggregation_is_unweighted_mean() {
        let rs = [
            EvalReport::new(2, 0.1, 0.2, 0.4, 0.4),
            EvalReport::new(1, 0.0, 0.1, 0.2, 0.2),
            EvalReport::new(2, 0.3, 0.0, 0.2, 0.6),
        ];
        let agg = aggregate(&rs);
        assert_eq!(agg.len(), 2);
        assert_eq!(agg[0].horizon, 1);
        assert!((agg[1].vertex_error - 0.2).abs() < 1e-15);
        assert!((agg[1].baseline_edge_error - 0.5).abs() < 1e-15);
        assert!((agg[1].reduction_vertex.unwrap() - (100.0 * (1.0 - 0.2 / 0.3))).abs() < 1e-9);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv("pa", "1", &[EvalReport::new(1, 0.01, 0.02, 0.04, 0.0)], &mut buf, true).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!(
                "{CSV_HEADER}\npa,1,1,last_seen,0.040000,0.000000,,\npa,1,1,proposed,0.010000,0.020000,75.00,\n"
            )
        );
    }
}
