//! Synthetic graph sequences grown by linear preferential attachment, and
//! the edge-deletion variant.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, GraphSeries, VertexId};

/// Name of the generator behind every seeded draw, for run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

/// Vertex count of each snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Schedule {
    /// One new vertex per snapshot: `n_t = s0 + t`.
    Classic,
    /// `n_t` uniform on `offset + step*t ..= offset + step*t + width - 1`.
    Uniform { offset: usize, step: usize, width: usize },
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaConfig {
    /// Edges brought by each new vertex.
    pub s: usize,
    /// Size of the seed cycle.
    pub s0: usize,
    /// Number of snapshots.
    pub length: usize,
    pub schedule: Schedule,
    pub seed: u64,
}

impl PaConfig {
    /// Twenty snapshots, ten edges per vertex, `n_t` drawn from
    /// `45+5t ..= 49+5t`.
    pub fn benchmark(seed: u64) -> Self {
        PaConfig {
            s: 10,
            s0: 10,
            length: 20,
            schedule: Schedule::Uniform {
                offset: 45,
                step: 5,
                width: 5,
            },
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.s < 1 {
            return Err(Error::OutOfRange("s must be at least 1".into()));
        }
        if self.s0 < self.s.max(3) {
            return Err(Error::OutOfRange(format!(
                "seed cycle of {} vertices cannot host {} edges per new vertex",
                self.s0, self.s
            )));
        }
        if self.length < 2 {
            return Err(Error::OutOfRange("a sequence needs at least 2 snapshots".into()));
        }
        Ok(())
    }

    fn vertex_counts(&self, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
        let counts: Vec<usize> = match &self.schedule {
            Schedule::Classic => (1..=self.length).map(|t| self.s0 + t).collect(),
            Schedule::Uniform {
                offset,
                step,
                width,
            } => {
                if *width < 1 {
                    return Err(Error::InvalidSchedule("empty sampling range".into()));
                }
                (1..=self.length)
                    .map(|t| offset + step * t + rng.gen_range(0..*width))
                    .collect()
            }
            Schedule::Explicit(v) => {
                if v.len() != self.length {
                    return Err(Error::InvalidSchedule(format!(
                        "{} counts for {} snapshots",
                        v.len(),
                        self.length
                    )));
                }
                v.clone()
            }
        };
        if counts[0] < self.s0 {
            return Err(Error::InvalidSchedule(format!(
                "first snapshot has {} vertices, fewer than the seed's {}",
                counts[0], self.s0
            )));
        }
        if let Some(w) = counts.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSchedule(format!(
                "vertex counts must increase, got {} then {}",
                w[0], w[1]
            )));
        }
        Ok(counts)
    }
}

/// Grows one graph vertex by vertex from an `s0`-cycle and snapshots it
/// whenever the vertex count reaches the schedule's next value.
///
/// The schedule is drawn first, then each new vertex picks `s` distinct
/// partners with probability proportional to their current degree.
pub fn pa_sequence(cfg: &PaConfig) -> Result<GraphSeries> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let counts = cfg.vertex_counts(&mut rng)?;

    let n0 = cfg.s0 as u64;
    let mut edges: Vec<Edge> = (0..n0)
        .map(|i| Edge::new(i, (i + 1) % n0).expect("cycle of length >= 3"))
        .collect();
    // Every edge contributes both endpoints, so a uniform draw from this
    // list is a degree-proportional draw over vertices.
    let mut endpoints: Vec<u64> = edges.iter().flat_map(|e| [e.low().0, e.high().0]).collect();
    let mut n = n0;

    let mut snapshots = Vec::with_capacity(cfg.length);
    let mut targets = BTreeSet::new();
    for &goal in &counts {
        while (n as usize) < goal {
            targets.clear();
            while targets.len() < cfg.s {
                targets.insert(endpoints[rng.gen_range(0..endpoints.len())]);
            }
            for &t in &targets {
                edges.push(Edge::new(n, t).expect("new vertex differs from targets"));
                endpoints.extend([t, n]);
            }
            n += 1;
        }
        snapshots.push(Graph::new((0..n).map(VertexId), edges.iter().copied())?);
    }
    GraphSeries::new(snapshots)
}

/// Deletes `r ~ U{r_min..=r_max}` edges uniformly from every snapshot after
/// the first. With `persistent` set a deleted edge stays deleted in all
/// later snapshots; otherwise each snapshot loses a fresh sample.
pub fn delete_edges(
    series: &GraphSeries,
    r_min: usize,
    r_max: usize,
    seed: u64,
    persistent: bool,
) -> Result<GraphSeries> {
    if r_min > r_max {
        return Err(Error::OutOfRange(format!("r_min {r_min} exceeds r_max {r_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deleted: BTreeSet<Edge> = BTreeSet::new();
    let mut out = Vec::with_capacity(series.len());
    for t in 1..=series.len() {
        let g = series.snapshot(t)?;
        if t == 1 {
            out.push(g.clone());
            continue;
        }
        let r = rng.gen_range(r_min..=r_max);
        let remaining: Vec<Edge> = g
            .edges()
            .filter(|e| !persistent || !deleted.contains(e))
            .collect();
        if remaining.len() <= r_max {
            return Err(Error::TooFewEdges {
                snapshot: t,
                edges: remaining.len(),
                needed: r_max + 1,
            });
        }
        let drop: BTreeSet<Edge> = sample(&mut rng, remaining.len(), r)
            .into_iter()
            .map(|i| remaining[i])
            .collect();
        let kept = remaining.iter().copied().filter(|e| !drop.contains(e));
        out.push(Graph::new(g.vertices(), kept)?);
        if persistent {
            deleted.extend(drop);
        }
    }
    GraphSeries::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classic(s0: usize, s: usize, length: usize, seed: u64) -> PaConfig {
        PaConfig {
            s,
            s0,
            length,
            schedule: Schedule::Classic,
            seed,
        }
    }

    #[test]
    fn classic_counts() {
        let series = pa_sequence(&classic(5, 2, 3, 1)).unwrap();
        let last = series.last();
        assert_eq!(last.vertex_count(), 8);
        assert_eq!(last.edge_count(), 11);
        for t in 2..=series.len() {
            let (a, b) = (series.snapshot(t - 1).unwrap(), series.snapshot(t).unwrap());
            assert_eq!(b.edge_count() - a.edge_count(), 2 * (b.vertex_count() - a.vertex_count()));
        }
    }

    #[test]
    fn benchmark_schedule() {
        let series = pa_sequence(&PaConfig::benchmark(3)).unwrap();
        assert_eq!(series.len(), 20);
        for t in 1..=20 {
            let n = series.snapshot(t).unwrap().vertex_count();
            assert!((45 + 5 * t..=49 + 5 * t).contains(&n), "n_{t} = {n}");
            assert_eq!(series.snapshot(t).unwrap().edge_count(), 10 + 10 * (n - 10));
        }
    }

    #[test]
    fn same_seed_same_series() {
        let a = pa_sequence(&PaConfig::benchmark(9)).unwrap();
        let b = pa_sequence(&PaConfig::benchmark(9)).unwrap();
        let c = pa_sequence(&PaConfig::benchmark(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn degrees_are_heavy_tailed() {
        let cfg = PaConfig {
            length: 10,
            schedule: Schedule::Explicit((1..=10).map(|t| 10 + 14 * t).collect()),
            ..PaConfig::benchmark(4)
        };
        let g = pa_sequence(&cfg).unwrap().last().clone();
        assert_eq!(g.vertex_count(), 150);
        let degrees: Vec<usize> = g.vertices().map(|v| g.degree(v).unwrap()).collect();
        let mean = degrees.iter().sum::<usize>() as f64 / degrees.len() as f64;
        let max = *degrees.iter().max().unwrap() as f64;
        assert!(max > 3.0 * mean, "max {max}, mean {mean}");
    }

    #[test]
    fn schedule_errors() {
        let cfg = PaConfig {
            schedule: Schedule::Explicit(vec![20, 20]),
            length: 2,
            ..PaConfig::benchmark(0)
        };
        assert!(matches!(pa_sequence(&cfg), Err(Error::InvalidSchedule(_))));
        let cfg = PaConfig {
            schedule: Schedule::Explicit(vec![5, 20]),
            length: 2,
            ..PaConfig::benchmark(0)
        };
        assert!(matches!(pa_sequence(&cfg), Err(Error::InvalidSchedule(_))));
        assert!(matches!(pa_sequence(&classic(2, 2, 3, 0)), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn zero_deletions_are_identity() {
        let s = pa_sequence(&PaConfig::benchmark(1)).unwrap();
        assert_eq!(delete_edges(&s, 0, 0, 5, true).unwrap(), s);
    }

    #[test]
    fn deletions_are_cumulative() {
        let s = pa_sequence(&PaConfig::benchmark(2)).unwrap();
        let d = delete_edges(&s, 5, 10, 8, true).unwrap();
        for t in 1..=s.len() {
            let (orig, cut) = (s.snapshot(t).unwrap(), d.snapshot(t).unwrap());
            let lost = orig.edge_count() - cut.edge_count();
            assert!((5 * (t - 1)..=10 * (t - 1)).contains(&lost), "t={t} lost {lost}");
            assert_eq!(orig.vertex_set(), cut.vertex_set());
            assert!(cut.edges().all(|e| orig.contains_edge(&e)));
        }
        for t in 2..=s.len() {
            let (prev, cur) = (d.snapshot(t - 1).unwrap(), d.snapshot(t).unwrap());
            let new_in_orig: BTreeSet<Edge> = s.snapshot(t).unwrap().edge_set().difference(s.snapshot(t - 1).unwrap().edge_set()).copied().collect();
            assert!(cur.edges().all(|e| prev.contains_edge(&e) || new_in_orig.contains(&e)));
        }
    }

    #[test]
    fn fresh_deletions_restore_earlier_losses() {
        let s = pa_sequence(&PaConfig::benchmark(2)).unwrap();
        let d = delete_edges(&s, 5, 10, 8, false).unwrap();
        for t in 2..=s.len() {
            let lost = s.snapshot(t).unwrap().edge_count() - d.snapshot(t).unwrap().edge_count();
            assert!((5..=10).contains(&lost));
        }
    }

    #[test]
    fn too_few_edges() {
        let s = pa_sequence(&classic(3, 1, 3, 0)).unwrap();
        assert!(matches!(delete_edges(&s, 5, 10, 0, true), Err(Error::TooFewEdges { .. })));
    }
}
