//! Timestamped edge lists: parsing, snapshot boundaries, expanding windows,
//! and writing series back out.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, GraphSeries, VertexId};

/// Snapshot boundaries kept by [`boundary_schedule`]: enough for training
/// origins up to 24 with horizons up to 5.
pub const MAX_WINDOWS: usize = 29;

const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeEvent {
    pub u: VertexId,
    pub v: VertexId,
    pub t: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Delimiter {
    Whitespace,
    Comma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedEdgeList {
    pub events: Vec<EdgeEvent>,
    pub delimiter: Option<Delimiter>,
    pub data_lines: usize,
    pub self_loops: usize,
    pub malformed: usize,
}

fn parse_fields(line: &str, delimiter: Delimiter) -> Option<(u64, u64, i64)> {
    let fields: Vec<&str> = match delimiter {
        Delimiter::Whitespace => line.split_whitespace().collect(),
        Delimiter::Comma => line.split(',').map(str::trim).collect(),
    };
    // `u v t`, or `u v w t` with an ignored weight column.
    let t = match fields.len() {
        3 => fields[2],
        4 => fields[3],
        _ => return None,
    };
    Some((fields[0].parse().ok()?, fields[1].parse().ok()?, t.parse().ok()?))
}

/// Parses `u v t` or `u,v,t` lines; the delimiter is fixed by the first data
/// line. Lines starting with `%` or `#` are comments. Self-loops are dropped
/// and counted; more than 1% malformed lines abort the parse.
pub fn parse_edgelist<R: BufRead>(reader: R) -> Result<ParsedEdgeList> {
    let mut out = ParsedEdgeList {
        events: Vec::new(),
        delimiter: None,
        data_lines: 0,
        self_loops: 0,
        malformed: 0,
    };
    let mut first_bad = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        out.data_lines += 1;
        let delimiter = *out.delimiter.get_or_insert(if trimmed.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        });
        match parse_fields(trimmed, delimiter) {
            Some((u, v, _)) if u == v => out.self_loops += 1,
            Some((u, v, t)) => out.events.push(EdgeEvent {
                u: VertexId(u),
                v: VertexId(v),
                t,
            }),
            None => {
                out.malformed += 1;
                first_bad.get_or_insert(idx + 1);
            }
        }
    }
    if out.malformed * 100 > out.data_lines {
        return Err(Error::MalformedInput {
            malformed: out.malformed,
            total: out.data_lines,
            first_line: first_bad.unwrap_or(0),
        });
    }
    Ok(out)
}

pub fn parse_edgelist_str(text: &str) -> Result<ParsedEdgeList> {
    parse_edgelist(text.as_bytes())
}

pub fn read_edgelist(path: impl AsRef<Path>) -> Result<ParsedEdgeList> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_edgelist(std::io::BufReader::new(file))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Granularity {
    Daily,
    Weekly,
    Biweekly,
    /// Boundaries at multiples of the given tick length.
    Ticks(i64),
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Granularity::Daily => write!(f, "daily"),
            Granularity::Weekly => write!(f, "weekly"),
            Granularity::Biweekly => write!(f, "biweekly"),
            Granularity::Ticks(n) => write!(f, "ticks:{n}"),
        }
    }
}

impl FromStr for Granularity {
    type Err = Error;

    /// `daily`, `weekly`, `biweekly`, or `ticks:N`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "daily" => Ok(Granularity::Daily),
            "weekly" => Ok(Granularity::Weekly),
            "biweekly" => Ok(Granularity::Biweekly),
            other => other
                .strip_prefix("ticks:")
                .and_then(|n| n.parse::<i64>().ok())
                .filter(|n| *n > 0)
                .map(Granularity::Ticks)
                .ok_or_else(|| Error::InvalidSchedule(format!("unknown granularity `{s}`"))),
        }
    }
}

/// End-of-period boundaries covering every event, at most [`MAX_WINDOWS`].
///
/// Calendar periods start at UTC midnight of the earliest event's day; each
/// boundary is the last second of its period. Tick periods end at multiples
/// of the tick length.
pub fn boundary_schedule(events: &[EdgeEvent], granularity: Granularity) -> Result<Vec<i64>> {
    boundary_schedule_capped(events, granularity, MAX_WINDOWS)
}

pub fn boundary_schedule_capped(
    events: &[EdgeEvent],
    granularity: Granularity,
    cap: usize,
) -> Result<Vec<i64>> {
    let (Some(first), Some(last)) = (
        events.iter().map(|e| e.t).min(),
        events.iter().map(|e| e.t).max(),
    ) else {
        return Err(Error::InvalidSchedule("no events to schedule".into()));
    };
    let (start, period, end_offset) = match granularity {
        Granularity::Ticks(n) if n > 0 => ((first - 1).div_euclid(n) * n, n, 0),
        Granularity::Ticks(n) => {
            return Err(Error::InvalidSchedule(format!("tick length {n} must be positive")))
        }
        calendar => {
            let days = match calendar {
                Granularity::Daily => 1,
                Granularity::Weekly => 7,
                _ => 14,
            };
            (first.div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY, days * SECONDS_PER_DAY, 1)
        }
    };
    let mut out = Vec::new();
    let mut b = start;
    while out.len() < cap {
        b += period;
        out.push(b - end_offset);
        if b - end_offset >= last {
            break;
        }
    }
    Ok(out)
}

/// Snapshot `l` holds every distinct edge with time at most `boundaries[l]`
/// and the vertices it touches.
pub fn expanding_windows(events: &[EdgeEvent], boundaries: &[i64]) -> Result<GraphSeries> {
    if boundaries.is_empty() {
        return Err(Error::InvalidSchedule("no boundaries".into()));
    }
    if let Some(w) = boundaries.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSchedule(format!(
            "boundaries must increase, got {} then {}",
            w[0], w[1]
        )));
    }
    let mut sorted: Vec<&EdgeEvent> = events.iter().collect();
    sorted.sort_by_key(|e| e.t);

    let mut edges: BTreeSet<Edge> = BTreeSet::new();
    let mut next = 0;
    let mut snapshots = Vec::with_capacity(boundaries.len());
    for &b in boundaries {
        while next < sorted.len() && sorted[next].t <= b {
            let e = sorted[next];
            edges.insert(Edge::new(e.u, e.v).ok_or(Error::InvalidGraph(format!(
                "self-loop at vertex {}",
                e.u.0
            )))?);
            next += 1;
        }
        if snapshots.is_empty() && edges.is_empty() {
            return Err(Error::EmptySnapshot(b));
        }
        snapshots.push(Graph::from_edges(edges.iter().copied()));
    }
    GraphSeries::new(snapshots)
}

/// One event per edge, stamped with the 1-based index of the snapshot where
/// it first appears, sorted by time then edge. Vertices without edges are
/// not representable and are lost.
pub fn series_events(series: &GraphSeries) -> Vec<EdgeEvent> {
    let mut seen: BTreeSet<Edge> = BTreeSet::new();
    let mut out = Vec::new();
    for (i, g) in series.snapshots().iter().enumerate() {
        for e in g.edges() {
            if seen.insert(e) {
                out.push(EdgeEvent {
                    u: e.low(),
                    v: e.high(),
                    t: i as i64 + 1,
                });
            }
        }
    }
    out
}

pub fn write_edgelist<W: Write>(events: &[EdgeEvent], mut out: W) -> Result<()> {
    for e in events {
        writeln!(out, "{} {} {}", e.u.0, e.v.0, e.t)?;
    }
    Ok(())
}

/// Writes one graph as an ingestible edge list stamped with time `t`. The
/// vertex count and any isolated vertices go in leading comment lines.
pub fn write_graph<W: Write>(graph: &Graph, t: i64, mut out: W) -> Result<()> {
    writeln!(out, "# vertex_count={}", graph.vertex_count())?;
    for v in graph.vertices() {
        if graph.degree(v)? == 0 {
            writeln!(out, "# isolated {}", v.0)?;
        }
    }
    for e in graph.edges() {
        writeln!(out, "{} {} {t}", e.low().0, e.high().0)?;
    }
    Ok(())
}
