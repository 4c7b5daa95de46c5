//! Small-world statistics on directed link graphs.
//!
//! Path lengths are hop counts over ordered pairs that are reachable;
//! unreachable pairs are counted separately. Clustering is the mean local
//! transitivity of out-neighbourhoods, which reduces to the usual
//! Watts-Strogatz coefficient on symmetric graphs. A pair is unidirectional
//! when a directed path exists one way but not the other.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linkgraph::DirectedLinkGraph;

pub const UNREACHABLE: u32 = u32::MAX;

/// Row-major `n x n` hop distances; `UNREACHABLE` marks absent paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopMatrix {
    n: usize,
    hops: Vec<u32>,
}

impl HopMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, from: usize, to: usize) -> Option<u32> {
        match self.hops[from * self.n + to] {
            UNREACHABLE => None,
            h => Some(h),
        }
    }

    pub fn reachable(&self, from: usize, to: usize) -> bool {
        self.hops[from * self.n + to] != UNREACHABLE
    }

    pub fn row(&self, from: usize) -> &[u32] {
        &self.hops[from * self.n..(from + 1) * self.n]
    }
}

/// Breadth-first hop counts from `src`.
pub fn bfs_hops(graph: &DirectedLinkGraph, src: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; graph.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        let next = dist[v] + 1;
        for &u in graph.out_neighbors(v) {
            if dist[u] == UNREACHABLE {
                dist[u] = next;
                queue.push_back(u);
            }
        }
    }
    dist
}

pub fn all_pairs_hop_distances(graph: &DirectedLinkGraph) -> HopMatrix {
    let n = graph.len();
    let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| bfs_hops(graph, s)).collect();
    HopMatrix { n, hops: rows.concat() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStats {
    pub apl: f64,
    pub reachable_pairs: u64,
    pub unreachable_fraction: f64,
}

fn path_stats(hops: &HopMatrix) -> Result<PathStats> {
    let n = hops.len();
    let (mut total, mut pairs) = (0u64, 0u64);
    for s in 0..n {
        for (t, &h) in hops.row(s).iter().enumerate() {
            if t != s && h != UNREACHABLE {
                total += u64::from(h);
                pairs += 1;
            }
        }
    }
    let ordered = (n * n.saturating_sub(1)) as u64;
    if pairs == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(PathStats {
        apl: total as f64 / pairs as f64,
        reachable_pairs: pairs,
        unreachable_fraction: (ordered - pairs) as f64 / ordered as f64,
    })
}

/// Mean hop distance over reachable ordered pairs.
pub fn average_path_length(graph: &DirectedLinkGraph) -> Result<f64> {
    path_stats(&all_pairs_hop_distances(graph)).map(|s| s.apl)
}

/// Fraction of ordered pairs `(s, t)`, `s != t`, with no path.
pub fn unreachable_pair_fraction(graph: &DirectedLinkGraph) -> f64 {
    let hops = all_pairs_hop_distances(graph);
    unreachable_from_matrix(&hops)
}

fn unreachable_from_matrix(hops: &HopMatrix) -> f64 {
    let n = hops.len();
    if n < 2 {
        return 0.0;
    }
    let missing = (0..n)
        .flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t)))
        .filter(|&(s, t)| !hops.reachable(s, t))
        .count();
    missing as f64 / (n * (n - 1)) as f64
}

pub fn clustering_coefficient(graph: &DirectedLinkGraph) -> f64 {
    let n = graph.len();
    if n == 0 {
        return 0.0;
    }
    let total: f64 = (0..n)
        .map(|v| {
            let outs = graph.out_neighbors(v);
            let k = outs.len();
            if k < 2 {
                return 0.0;
            }
            let linked = outs
                .iter()
                .map(|&a| outs.iter().filter(|&&b| b != a && graph.has_edge(a, b)).count())
                .sum::<usize>();
            linked as f64 / (k * (k - 1)) as f64
        })
        .sum();
    total / n as f64
}

pub fn unidirectional_pair_fraction(graph: &DirectedLinkGraph) -> f64 {
    unidirectional_from_matrix(&all_pairs_hop_distances(graph))
}

fn unidirectional_from_matrix(hops: &HopMatrix) -> f64 {
    let n = hops.len();
    if n < 2 {
        return 0.0;
    }
    let mut one_way = 0usize;
    for a in 0..n {
        for b in a + 1..n {
            if hops.reachable(a, b) != hops.reachable(b, a) {
                one_way += 1;
            }
        }
    }
    one_way as f64 / (n * (n - 1) / 2) as f64
}

/// Path, clustering and connectivity statistics of one graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    /// `NaN` when no ordered pair is reachable.
    pub apl: f64,
    pub clustering: f64,
    pub unidirectional_fraction: f64,
    pub unreachable_fraction: f64,
}

impl GraphStats {
    pub fn compute(graph: &DirectedLinkGraph) -> Self {
        let hops = all_pairs_hop_distances(graph);
        let apl = path_stats(&hops).map(|s| s.apl).unwrap_or(f64::NAN);
        GraphStats {
            apl,
            clustering: clustering_coefficient(graph),
            unidirectional_fraction: unidirectional_from_matrix(&hops),
            unreachable_fraction: unreachable_from_matrix(&hops),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Ordinary least squares of `y` on `x`. `r_squared` is 0 when `y` has no
/// variance.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} points, need at least 3",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateFit("non-finite point".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 || sxx == 0.0 {
        return Err(Error::DegenerateFit("need at least 3 distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        let ss_res: f64 = points.iter().map(|p| (p.1 - (slope * p.0 + intercept)).powi(2)).sum();
        1.0 - ss_res / syy
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Fit of `apl = slope * ln(D) + intercept` over `(D, apl)` points.
pub fn log_growth_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.iter().any(|p| p.0 <= 0.0) {
        return Err(Error::DegenerateFit("diameter must be positive".into()));
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(d, l)| (d.ln(), l)).collect();
    linear_fit(&logged)
}

/// One simulated network compared with its all-omni baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub seed: u64,
    pub n: usize,
    pub width: f64,
    pub height: f64,
    pub model: String,
    pub p: f64,
    pub beta: Option<f64>,
    pub baseline_apl: f64,
    pub apl: f64,
    pub baseline_clustering: f64,
    pub clustering: f64,
    pub unidirectional_pair_fraction: f64,
    pub unreachable_pair_fraction: f64,
    pub beamformer_fraction: f64,
    pub diameter_d: f64,
}

pub const REPORT_COLUMNS: [&str; 15] = [
    "seed",
    "n",
    "width",
    "height",
    "model",
    "p",
    "beta",
    "apl0",
    "apl",
    "c0",
    "c",
    "uni_frac",
    "unreach_frac",
    "beamformer_frac",
    "d",
];

impl MetricsReport {
    pub fn apl_ratio(&self) -> f64 {
        self.apl / self.baseline_apl
    }

    pub fn clustering_ratio(&self) -> f64 {
        self.clustering / self.baseline_clustering
    }

    pub fn apl_reduction(&self) -> f64 {
        1.0 - self.apl_ratio()
    }

    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.n.to_string(),
            self.width.to_string(),
            self.height.to_string(),
            self.model.clone(),
            self.p.to_string(),
            self.beta.map(|b| b.to_string()).unwrap_or_default(),
            self.baseline_apl.to_string(),
            self.apl.to_string(),
            self.baseline_clustering.to_string(),
            self.clustering.to_string(),
            self.unidirectional_pair_fraction.to_string(),
            self.unreachable_pair_fraction.to_string(),
            self.beamformer_fraction.to_string(),
            self.diameter_d.to_string(),
        ]
    }
}

pub fn write_reports<W: Write>(out: W, rows: &[MetricsReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_reports(path: &Path, rows: &[MetricsReport]) -> Result<()> {
    write_reports(std::fs::File::create(path)?, rows)
}

/// Reads a results table by column name; a missing column is an error
/// naming it.
pub fn read_reports<R: Read>(input: R, origin: &Path) -> Result<Vec<MetricsReport>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 15];
    for (slot, name) in idx.iter_mut().zip(REPORT_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |i: usize| rec.get(idx[i]).unwrap_or("");
        let f = |i: usize| -> Result<f64> {
            get(i)
                .parse()
                .map_err(|_| Error::parse(origin, format!("row {line}: bad `{}`", REPORT_COLUMNS[i])))
        };
        let beta = match get(6) {
            "" => None,
            _ => Some(f(6)?),
        };
        rows.push(MetricsReport {
            seed: get(0)
                .parse()
                .map_err(|_| Error::parse(origin, format!("row {line}: bad `seed`")))?,
            n: get(1)
                .parse()
                .map_err(|_| Error::parse(origin, format!("row {line}: bad `n`")))?,
            width: f(2)?,
            height: f(3)?,
            model: get(4).to_string(),
            p: f(5)?,
            beta,
            baseline_apl: f(7)?,
            apl: f(8)?,
            baseline_clustering: f(9)?,
            clustering: f(10)?,
            unidirectional_pair_fraction: f(11)?,
            unreachable_pair_fraction: f(12)?,
            beamformer_fraction: f(13)?,
            diameter_d: f(14)?,
        });
    }
    Ok(rows)
}

pub fn load_reports(path: &Path) -> Result<Vec<MetricsReport>> {
    read_reports(std::fs::File::open(path)?, path)
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
