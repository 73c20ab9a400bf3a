//! Per-graph and corpus statistics.
//!
//! Degree, components and diameter are measured on the undirected view.
//! Corpus aggregates sort each column before reducing, so results do not
//! depend on record order.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Family, TypedDigraph, UndirectedGraph};

pub const DEFAULT_DIAMETER_CAP: usize = 20_000;
/// Size threshold for the "large graph" fraction.
pub const LARGE_GRAPH_NODES: usize = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("empty corpus: no graphs to summarize")]
    EmptyCorpus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRecord {
    pub name: String,
    pub family: Family,
    pub n_nodes: usize,
    pub n_edges_directed: usize,
    pub n_edges_undirected: usize,
    pub avg_degree: f64,
    pub n_components: usize,
    /// `None` when the graph exceeded the diameter cap.
    pub diameter: Option<u32>,
}

/// Component label per node and the number of components.
pub fn connected_components(g: &UndirectedGraph) -> (Vec<u32>, usize) {
    let n = g.num_nodes();
    let mut label = vec![u32::MAX; n];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != u32::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start as u32);
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if label[v as usize] == u32::MAX {
                    label[v as usize] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (label, count as usize)
}

/// Largest finite shortest-path distance, by BFS from every node. This is
/// the maximum of the per-component diameters.
pub fn diameter(g: &UndirectedGraph) -> u32 {
    let n = g.num_nodes();
    let mut dist = vec![0u32; n];
    let mut seen = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let mut best = 0;
    for s in 0..n {
        let stamp = s as u32;
        seen[s] = stamp;
        dist[s] = 0;
        queue.push_back(s as u32);
        while let Some(u) = queue.pop_front() {
            let d = dist[u as usize];
            best = best.max(d);
            for &v in g.neighbors(u) {
                if seen[v as usize] != stamp {
                    seen[v as usize] = stamp;
                    dist[v as usize] = d + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    best
}

pub fn graph_stats(name: impl Into<String>, g: &TypedDigraph, diameter_cap: usize) -> StatRecord {
    let und = g.undirected_view();
    let n = g.num_nodes();
    let avg_degree = if n == 0 {
        0.0
    } else {
        2.0 * und.num_edges() as f64 / n as f64
    };
    StatRecord {
        name: name.into(),
        family: g.family(),
        n_nodes: n,
        n_edges_directed: g.num_edges(),
        n_edges_undirected: und.num_edges(),
        avg_degree,
        n_components: connected_components(&und).1,
        diameter: (n <= diameter_cap).then(|| diameter(&und)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_std: Option<f64>,
}

impl Moments {
    fn of(mut values: Vec<f64>) -> Moments {
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Moments {
            mean,
            std: (ss / n).sqrt(),
            sample_std: (values.len() > 1).then(|| (ss / (n - 1.0)).sqrt()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_graphs: usize,
    pub total_nodes: u64,
    pub max_nodes: usize,
    pub nodes: Moments,
    pub avg_degree: Moments,
    pub components: Moments,
    /// Over records whose diameter was computed; `None` if there are none.
    pub diameter: Option<Moments>,
    pub diameter_computed_fraction: f64,
    pub frac_over_1000: f64,
}

impl CorpusSummary {
    /// Drops the sample standard deviations.
    pub fn population_only(mut self) -> Self {
        for m in [&mut self.nodes, &mut self.avg_degree, &mut self.components] {
            m.sample_std = None;
        }
        if let Some(d) = &mut self.diameter {
            d.sample_std = None;
        }
        self
    }
}

fn over_threshold_fraction(records: &[StatRecord]) -> f64 {
    records.iter().filter(|r| r.n_nodes > LARGE_GRAPH_NODES).count() as f64 / records.len() as f64
}

pub fn corpus_stats(records: &[StatRecord]) -> Result<CorpusSummary, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let column = |f: fn(&StatRecord) -> f64| Moments::of(records.iter().map(f).collect());
    let diameters: Vec<f64> = records.iter().filter_map(|r| r.diameter).map(f64::from).collect();
    let computed = diameters.len();
    Ok(CorpusSummary {
        n_graphs: records.len(),
        total_nodes: records.iter().map(|r| r.n_nodes as u64).sum(),
        max_nodes: records.iter().map(|r| r.n_nodes).max().unwrap_or(0),
        nodes: column(|r| r.n_nodes as f64),
        avg_degree: column(|r| r.avg_degree),
        components: column(|r| r.n_components as f64),
        diameter: (computed > 0).then(|| Moments::of(diameters)),
        diameter_computed_fraction: computed as f64 / records.len() as f64,
        frac_over_1000: over_threshold_fraction(records),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxPlot {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub frac_over_1000: f64,
}

/// Linear-interpolation quantile of sorted data (`h = (n - 1) p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box-plot summary of graph sizes (node counts).
pub fn size_distribution(records: &[StatRecord]) -> Result<BoxPlot, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let mut sizes: Vec<f64> = records.iter().map(|r| r.n_nodes as f64).collect();
    sizes.sort_by(f64::total_cmp);
    Ok(BoxPlot {
        n: sizes.len(),
        min: sizes[0],
        q1: quantile(&sizes, 0.25),
        median: quantile(&sizes, 0.5),
        q3: quantile(&sizes, 0.75),
        max: sizes[sizes.len() - 1],
        mean: records.iter().map(|r| r.n_nodes as u64).sum::<u64>() as f64 / sizes.len() as f64,
        frac_over_1000: over_threshold_fraction(records),
    })
}

pub fn write_stats_csv<W: Write>(records: &[StatRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "name",
        "family",
        "n_nodes",
        "n_edges_directed",
        "n_edges_undirected",
        "avg_degree",
        "n_components",
        "diameter",
    ])?;
    for r in records {
        w.write_record([
            r.name.clone(),
            r.family.name().to_string(),
            r.n_nodes.to_string(),
            r.n_edges_directed.to_string(),
            r.n_edges_undirected.to_string(),
            r.avg_degree.to_string(),
            r.n_components.to_string(),
            r.diameter.map_or_else(|| "skipped".to_string(), |d| d.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One box-plot row per family present, in vocabulary order.
pub fn write_distribution_csv<W: Write>(records: &[StatRecord], out: W) -> Result<(), DistributionError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "family",
        "n",
        "min",
        "q1",
        "median",
        "q3",
        "max",
        "mean",
        "frac_over_1000",
    ])?;
    let mut any = false;
    for family in [Family::Pdg, Family::Asg] {
        let subset: Vec<StatRecord> = records.iter().filter(|r| r.family == family).cloned().collect();
        if subset.is_empty() {
            continue;
        }
        any = true;
        let b = size_distribution(&subset)?;
        w.write_record([
            family.name().to_string(),
            b.n.to_string(),
            b.min.to_string(),
            b.q1.to_string(),
            b.median.to_string(),
            b.q3.to_string(),
            b.max.to_string(),
            b.mean.to_string(),
            b.frac_over_1000.to_string(),
        ])?;
    }
    if !any {
        return Err(StatsError::EmptyCorpus.into());
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum DistributionError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
