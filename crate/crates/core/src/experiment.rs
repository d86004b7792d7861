//! Evaluation protocols: repeated synthetic runs with a fixed training
//! length, and a moving training window over one long series.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::{delete_edges, pa_sequence, PaConfig};
use crate::error::{Error, Result};
use crate::eval::{aggregate, EvalReport};
use crate::graph::GraphSeries;
use crate::predictor::{PredictParams, Predictor};

/// Width of the moving training window.
pub const REAL_WINDOW: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Synthetic {
    /// Pure preferential-attachment growth.
    Growth,
    /// Growth with random edge deletions after every step.
    Deletion,
}

impl Synthetic {
    pub fn number(self) -> u8 {
        match self {
            Synthetic::Growth => 1,
            Synthetic::Deletion => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Synthetic::Growth),
            2 => Ok(Synthetic::Deletion),
            _ => Err(Error::OutOfRange(format!("experiment {n} is not 1 or 2"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub experiment: Synthetic,
    pub runs: usize,
    /// Training snapshots per run.
    pub train_len: usize,
    pub horizons: Vec<usize>,
    pub params: PredictParams,
    pub seed: u64,
    /// Generator settings; the seed field is replaced per run.
    pub pa: PaConfig,
    pub deletions: (usize, usize),
    pub persistent_deletions: bool,
}

impl SyntheticConfig {
    /// Ten runs of twenty snapshots, training on fifteen, horizons 1 to 5.
    pub fn benchmark(experiment: Synthetic, seed: u64) -> Self {
        SyntheticConfig {
            experiment,
            runs: 10,
            train_len: 15,
            horizons: (1..=5).collect(),
            params: PredictParams::default(),
            seed,
            pa: PaConfig::benchmark(0),
            deletions: (5, 10),
            persistent_deletions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// Every scored `(origin, horizon)` cell, grouped by run or origin.
    pub cells: Vec<Vec<EvalReport>>,
    /// Per-horizon means over all cells.
    pub summary: Vec<EvalReport>,
}

fn max_horizon(horizons: &[usize]) -> Result<usize> {
    match horizons.iter().max() {
        Some(&h) if !horizons.contains(&0) => Ok(h),
        _ => Err(Error::OutOfRange("horizons must be non-empty and positive".into())),
    }
}

/// Trains on `train` and scores each horizon against `truth`, where
/// `truth(h)` is the snapshot `h` steps after the last training snapshot.
fn score_horizons<'a>(
    train: &GraphSeries,
    horizons: &[usize],
    params: &PredictParams,
    truth: impl Fn(usize) -> Result<&'a crate::graph::Graph>,
) -> Result<Vec<EvalReport>> {
    let predictor = Predictor::new(train)?;
    horizons
        .iter()
        .map(|&h| {
            let pred = predictor.predict(&params.with_horizon(h))?;
            EvalReport::score(h, &pred.graph, train.last(), truth(h)?)
        })
        .collect()
}

/// Per-run seeds for generation and deletion, drawn from one stream.
pub fn run_seeds(seed: u64, runs: usize) -> Vec<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..runs).map(|_| (rng.next_u64(), rng.next_u64())).collect()
}

/// The series a synthetic run generates.
pub fn synthetic_series(cfg: &SyntheticConfig, gen_seed: u64, del_seed: u64) -> Result<GraphSeries> {
    let length = cfg.train_len + max_horizon(&cfg.horizons)?;
    let pa = PaConfig {
        seed: gen_seed,
        length: length.max(cfg.pa.length),
        ..cfg.pa.clone()
    };
    let series = pa_sequence(&pa)?;
    match cfg.experiment {
        Synthetic::Growth => Ok(series),
        Synthetic::Deletion => delete_edges(
            &series,
            cfg.deletions.0,
            cfg.deletions.1,
            del_seed,
            cfg.persistent_deletions,
        ),
    }
}

pub fn run_synthetic_experiment(cfg: &SyntheticConfig) -> Result<ExperimentResult> {
    cfg.params.validate()?;
    max_horizon(&cfg.horizons)?;
    if cfg.runs == 0 {
        return Err(Error::OutOfRange("at least one run is required".into()));
    }
    let cells = run_seeds(cfg.seed, cfg.runs)
        .into_iter()
        .map(|(gen_seed, del_seed)| {
            let series = synthetic_series(cfg, gen_seed, del_seed)?;
            let train = series.window(1, cfg.train_len)?;
            score_horizons(&train, &cfg.horizons, &cfg.params, |h| {
                series.snapshot(cfg.train_len + h)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = aggregate(&cells.concat());
    Ok(ExperimentResult { cells, summary })
}

/// For every origin `T`, trains on the `window` snapshots ending at `T` and
/// scores each horizon; the summary averages over all origins.
pub fn run_real_experiment(
    series: &GraphSeries,
    origins: &[usize],
    horizons: &[usize],
    params: &PredictParams,
    window: usize,
) -> Result<ExperimentResult> {
    params.validate()?;
    let h_max = max_horizon(horizons)?;
    let (Some(&t_min), Some(&t_max)) = (origins.iter().min(), origins.iter().max()) else {
        return Err(Error::OutOfRange("no training origins".into()));
    };
    if t_min < window {
        return Err(Error::OutOfRange(format!(
            "origin {t_min} leaves no room for a window of {window}"
        )));
    }
    if series.len() < t_max + h_max {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: t_max + h_max,
        });
    }
    let cells = origins
        .iter()
        .map(|&t| {
            let train = series.window(t + 1 - window, t)?;
            score_horizons(&train, horizons, params, |h| series.snapshot(t + h))
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = aggregate(&cells.concat());
    Ok(ExperimentResult { cells, summary })
}
