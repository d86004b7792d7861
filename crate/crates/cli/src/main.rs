//! Command-line front end: synthetic data, one-shot prediction, the two
//! evaluation protocols, and parameter sweeps.

mod config;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fluxgraph::datagen::{pa_sequence, PaConfig, RNG_ALGORITHM};
use fluxgraph::eval::write_csv;
use fluxgraph::experiment::{
    run_real_experiment, run_synthetic_experiment, Synthetic, SyntheticConfig, REAL_WINDOW,
};
use fluxgraph::ingest::{
    boundary_schedule, expanding_windows, read_edgelist, series_events, write_edgelist,
    write_graph, Granularity,
};
use fluxgraph::predictor::{PredictParams, Predictor};
use fluxgraph::GraphSeries;

use config::{parse_list, parse_reals, ConfigFile};

#[derive(Parser)]
#[command(name = "fluxgraph", version, about = "Forecast the structure of growing graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a preferential-attachment series as a timestamped edge list.
    Synth(SynthArgs),
    /// Predict future snapshots of an edge list.
    Predict(PredictArgs),
    /// Repeated synthetic runs with a fixed training length.
    EvalSynth(EvalSynthArgs),
    /// Moving-window evaluation on an edge list.
    EvalReal(EvalRealArgs),
    /// Predictions over a grid of vertex-count and degree quantiles.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Objective weight of edges not yet present.
    #[arg(long)]
    alpha: Option<f64>,
    /// Attachment partners per new vertex.
    #[arg(long)]
    k: Option<usize>,
    /// Vertex-count quantile.
    #[arg(long)]
    gamma: Option<f64>,
    /// Degree and edge-count quantile.
    #[arg(long)]
    u: Option<f64>,
    /// Horizons, e.g. `1..5` or `1,3`.
    #[arg(long)]
    horizons: Option<String>,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Edge list of `u v t` or `u,v,t` lines.
    #[arg(long)]
    input: PathBuf,
    /// daily, weekly, biweekly or ticks:N.
    #[arg(long)]
    granularity: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    snapshots: Option<usize>,
    /// Edges per new vertex.
    #[arg(long)]
    s: Option<usize>,
    /// Seed cycle size.
    #[arg(long)]
    s0: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Last training snapshot (defaults to the last one).
    #[arg(long)]
    origin: Option<usize>,
    /// Training snapshots ending at the origin (defaults to all).
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args)]
struct EvalSynthArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// 1 for growth only, 2 for growth with deletions.
    #[arg(long)]
    experiment: Option<u8>,
    #[arg(long)]
    runs: Option<usize>,
    /// Training snapshots per run.
    #[arg(long)]
    train: Option<usize>,
    /// Re-draw deletions for every snapshot instead of accumulating them.
    #[arg(long)]
    fresh_deletions: bool,
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args)]
struct EvalRealArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Training origins, e.g. `15..24`.
    #[arg(long)]
    origins: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated vertex-count quantiles.
    #[arg(long)]
    gammas: Option<String>,
    /// Comma-separated degree quantiles.
    #[arg(long)]
    us: Option<String>,
    #[arg(long)]
    origin: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    rng: &'static str,
    seed: Option<u64>,
    params: Option<PredictParams>,
    settings: BTreeMap<&'static str, String>,
}

fn write_metadata(out: &Path, meta: &Metadata) -> Result<()> {
    let path = metadata_path(out);
    let json = serde_json::to_string_pretty(meta)?;
    fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))
}

/// `<out>.meta.json` next to a file, or `metadata.json` inside a directory.
fn metadata_path(out: &Path) -> PathBuf {
    if out.is_dir() {
        out.join("metadata.json")
    } else {
        let mut name = out.as_os_str().to_owned();
        name.push(".meta.json");
        PathBuf::from(name)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load_config(common: &Common) -> Result<ConfigFile> {
    common
        .config
        .as_deref()
        .map_or_else(|| Ok(ConfigFile::default()), ConfigFile::load)
}

fn model_params(m: &ModelArgs, cfg: &ConfigFile) -> Result<(PredictParams, Vec<usize>)> {
    let d = PredictParams::default();
    let params = PredictParams {
        gamma: cfg.resolve(m.gamma, "gamma", d.gamma)?,
        u: cfg.resolve(m.u, "u", d.u)?,
        alpha: cfg.resolve(m.alpha, "alpha", d.alpha)?,
        k: cfg.resolve(m.k, "k", d.k)?,
        h: 1,
    };
    params.validate()?;
    let horizons = parse_list(&cfg.resolve(m.horizons.clone(), "horizons", "1..5".to_string())?)?;
    if horizons.is_empty() || horizons.contains(&0) {
        bail!("horizons must be positive");
    }
    Ok((params, horizons))
}

fn load_series(input: &InputArgs, cfg: &ConfigFile, default: &str) -> Result<(GraphSeries, Granularity)> {
    let granularity: Granularity = cfg
        .resolve(input.granularity.clone(), "granularity", default.to_string())?
        .parse()?;
    let parsed = read_edgelist(&input.input)?;
    if parsed.self_loops > 0 {
        eprintln!("warning: dropped {} self-loop lines", parsed.self_loops);
    }
    if parsed.malformed > 0 {
        eprintln!("warning: skipped {} malformed lines", parsed.malformed);
    }
    let boundaries = boundary_schedule(&parsed.events, granularity)?;
    Ok((expanding_windows(&parsed.events, &boundaries)?, granularity))
}

/// Training series ending at `origin`, at most `window` snapshots long.
fn training_window(series: &GraphSeries, origin: Option<usize>, window: Option<usize>) -> Result<(GraphSeries, usize)> {
    let origin = origin.unwrap_or(series.len());
    let width = window.unwrap_or(origin).min(origin);
    if width == 0 {
        bail!("empty training window");
    }
    Ok((series.window(origin + 1 - width, origin)?, origin))
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let base = PaConfig::benchmark(0);
    let pa = PaConfig {
        s: cfg.resolve(a.s, "s", base.s)?,
        s0: cfg.resolve(a.s0, "s0", base.s0)?,
        length: cfg.resolve(a.snapshots, "snapshots", base.length)?,
        seed: cfg.resolve(a.common.seed, "seed", 0)?,
        ..base
    };
    let series = pa_sequence(&pa)?;
    let mut out = create(&a.common.out)?;
    write_edgelist(&series_events(&series), &mut out)?;
    out.flush()?;

    let settings = BTreeMap::from([
        ("s", pa.s.to_string()),
        ("s0", pa.s0.to_string()),
        ("snapshots", pa.length.to_string()),
        ("schedule", format!("{:?}", pa.schedule)),
        ("granularity", Granularity::Ticks(1).to_string()),
    ]);
    write_metadata(
        &a.common.out,
        &Metadata {
            tool: "fluxgraph",
            version: env!("CARGO_PKG_VERSION"),
            command: "synth",
            rng: RNG_ALGORITHM,
            seed: Some(pa.seed),
            params: None,
            settings,
        },
    )?;
    println!(
        "wrote {} snapshots ({} vertices, {} edges at the end) to {}",
        series.len(),
        series.last().vertex_count(),
        series.last().edge_count(),
        a.common.out.display()
    );
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let (params, horizons) = model_params(&a.model, &cfg)?;
    let (series, granularity) = load_series(&a.input, &cfg, "ticks:1")?;
    let origin = a.origin.or(cfg.get("origin")?);
    let window = a.window.or(cfg.get("window")?);
    let (train, origin) = training_window(&series, origin, window)?;

    let dir = &a.common.out;
    fs::create_dir_all(dir)?;
    let predictor = Predictor::new(&train)?;
    for &h in &horizons {
        let pred = predictor.predict(&params.with_horizon(h))?;
        let t = (origin + h) as i64;
        let path = dir.join(format!("prediction_h{h}.txt"));
        let mut out = create(&path)?;
        write_graph(&pred.graph, t, &mut out)?;
        out.flush()?;
        println!(
            "h={h}: {} vertices, {} edges -> {}",
            pred.graph.vertex_count(),
            pred.graph.edge_count(),
            path.display()
        );
    }

    let settings = BTreeMap::from([
        ("input", a.input.input.display().to_string()),
        ("granularity", granularity.to_string()),
        ("origin", origin.to_string()),
        ("window", train.len().to_string()),
        ("horizons", format!("{horizons:?}")),
    ]);
    write_metadata(
        dir,
        &Metadata {
            tool: "fluxgraph",
            version: env!("CARGO_PKG_VERSION"),
            command: "predict",
            rng: RNG_ALGORITHM,
            seed: None,
            params: Some(params),
            settings,
        },
    )
}

fn eval_synth(a: EvalSynthArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let (params, horizons) = model_params(&a.model, &cfg)?;
    let experiment = Synthetic::from_number(cfg.resolve(a.experiment, "experiment", 1)?)?;
    let seed = cfg.resolve(a.common.seed, "seed", 0)?;
    let fresh = a.fresh_deletions || cfg.get("fresh-deletions")?.unwrap_or(false);
    let run = SyntheticConfig {
        runs: cfg.resolve(a.runs, "runs", 10)?,
        train_len: cfg.resolve(a.train, "train", 15)?,
        horizons: horizons.clone(),
        params,
        persistent_deletions: !fresh,
        ..SyntheticConfig::benchmark(experiment, seed)
    };
    let dataset = cfg.resolve(a.dataset, "dataset", "pa".to_string())?;
    let result = run_synthetic_experiment(&run)?;

    let mut out = create(&a.common.out)?;
    write_csv(&dataset, &experiment.number().to_string(), &result.summary, &mut out, true)?;
    out.flush()?;
    print_summary(&result.summary);

    let settings = BTreeMap::from([
        ("dataset", dataset),
        ("experiment", experiment.number().to_string()),
        ("runs", run.runs.to_string()),
        ("train", run.train_len.to_string()),
        ("horizons", format!("{horizons:?}")),
        ("deletions", format!("{:?}", run.deletions)),
        ("persistent-deletions", run.persistent_deletions.to_string()),
        ("schedule", format!("{:?}", run.pa.schedule)),
    ]);
    write_metadata(
        &a.common.out,
        &Metadata {
            tool: "fluxgraph",
            version: env!("CARGO_PKG_VERSION"),
            command: "eval-synth",
            rng: RNG_ALGORITHM,
            seed: Some(seed),
            params: Some(params),
            settings,
        },
    )
}

fn eval_real(a: EvalRealArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let (params, horizons) = model_params(&a.model, &cfg)?;
    let (series, granularity) = load_series(&a.input, &cfg, "daily")?;
    let origins = parse_list(&cfg.resolve(a.origins, "origins", "15..24".to_string())?)?;
    let window = cfg.resolve(a.window, "window", REAL_WINDOW)?;
    let default_name = a
        .input
        .input
        .file_stem()
        .map_or_else(|| "edges".to_string(), |s| s.to_string_lossy().into_owned());
    let dataset = cfg.resolve(a.dataset, "dataset", default_name)?;
    let result = run_real_experiment(&series, &origins, &horizons, &params, window)?;

    let mut out = create(&a.common.out)?;
    write_csv(&dataset, "real", &result.summary, &mut out, true)?;
    out.flush()?;
    print_summary(&result.summary);

    let settings = BTreeMap::from([
        ("dataset", dataset),
        ("input", a.input.input.display().to_string()),
        ("granularity", granularity.to_string()),
        ("snapshots", series.len().to_string()),
        ("origins", format!("{origins:?}")),
        ("horizons", format!("{horizons:?}")),
        ("window", window.to_string()),
    ]);
    write_metadata(
        &a.common.out,
        &Metadata {
            tool: "fluxgraph",
            version: env!("CARGO_PKG_VERSION"),
            command: "eval-real",
            rng: RNG_ALGORITHM,
            seed: None,
            params: Some(params),
            settings,
        },
    )
}

fn sweep(a: SweepArgs) -> Result<()> {
    let cfg = load_config(&a.common)?;
    let (params, horizons) = model_params(&a.model, &cfg)?;
    let (series, granularity) = load_series(&a.input, &cfg, "ticks:1")?;
    let gammas = parse_reals(&cfg.resolve(a.gammas, "gammas", "0.1,0.3,0.5,0.7,0.9".to_string())?)?;
    let us = parse_reals(&cfg.resolve(a.us, "us", "0.5,0.6,0.7,0.8,0.9".to_string())?)?;
    let origin = a.origin.or(cfg.get("origin")?);
    let window = a.window.or(cfg.get("window")?);
    let (train, origin) = training_window(&series, origin, window)?;

    let predictor = Predictor::new(&train)?;
    let mut out = create(&a.common.out)?;
    writeln!(out, "h,gamma,u,n_hat,vertices,edges,edge_bound,ilp_objective,lp_objective")?;
    for &h in &horizons {
        for p in predictor.distribution(&gammas, &us, &params.with_horizon(h))? {
            let d = &p.diagnostics;
            writeln!(
                out,
                "{h},{},{},{},{},{},{:.6},{:.6},{}",
                p.params.gamma,
                p.params.u,
                d.n_hat,
                p.graph.vertex_count(),
                p.graph.edge_count(),
                p.edge_bound,
                d.ilp_objective,
                d.lp_objective.map_or_else(String::new, |v| format!("{v:.6}"))
            )?;
        }
    }
    out.flush()?;
    println!(
        "wrote {} cells to {}",
        gammas.len() * us.len() * horizons.len(),
        a.common.out.display()
    );

    let settings = BTreeMap::from([
        ("input", a.input.input.display().to_string()),
        ("granularity", granularity.to_string()),
        ("origin", origin.to_string()),
        ("window", train.len().to_string()),
        ("horizons", format!("{horizons:?}")),
        ("gammas", format!("{gammas:?}")),
        ("us", format!("{us:?}")),
    ]);
    write_metadata(
        &a.common.out,
        &Metadata {
            tool: "fluxgraph",
            version: env!("CARGO_PKG_VERSION"),
            command: "sweep",
            rng: RNG_ALGORITHM,
            seed: None,
            params: Some(params),
            settings,
        },
    )
}

fn print_summary(summary: &[fluxgraph::eval::EvalReport]) {
    let pct = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}%"));
    for r in summary {
        println!(
            "h={}: vertex {:.4} vs {:.4} ({}), edge {:.4} vs {:.4} ({})",
            r.horizon,
            r.vertex_error,
            r.baseline_vertex_error,
            pct(r.reduction_vertex),
            r.edge_error,
            r.baseline_edge_error,
            pct(r.reduction_edge)
        );
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(a) => synth(a),
        Command::Predict(a) => predict(a),
        Command::EvalSynth(a) => eval_synth(a),
        Command::EvalReal(a) => eval_real(a),
        Command::Sweep(a) => sweep(a),
    }
}
