//! Forecasting the structure of evolving graphs.
//!
//! Given a sequence of snapshots, fluxgraph forecasts vertex, edge and degree
//! counts with ARIMA models, builds a hypothetical graph holding every edge
//! that could plausibly exist at the horizon, and selects edges from it with
//! a binary integer program that keeps predicted degrees within their
//! forecast quantiles.

pub mod candidates;
pub mod constraints;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod ingest;
pub mod predictor;
pub mod solver;
pub mod timeseries;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, GraphSeries, VertexId};
