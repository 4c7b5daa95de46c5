//! Seeded sweeps over the three studies.
//!
//! Every replicate owns its seed, `derive_seed(base_seed, REPLICATE + i)`,
//! from which its topology, beamformer choice, orientations and traffic are
//! derived on separate streams. Replicates run on a rayon pool and are merged
//! in (region, parameter, replicate) order, so the output does not depend on
//! the thread count.
//!
//! In the randomized sweep one node permutation and one orientation per node
//! are drawn per replicate; the beamformers for fraction `p` are the first
//! `ceil(p N)` nodes of that permutation. Each `p` still sees a uniform
//! subset, and neighbouring `p` values share their common beamformers.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::antenna::{map_sector_to_ula, optimal_beamwidth, sector_beam_length, AntennaConfig};
use crate::config::{AntennaModel, ExperimentConfig, Region, Study};
use crate::error::{Error, Result};
use crate::linkgraph::{build_link_graph, omni_graph};
use crate::metrics::{linear_fit, log_growth_fit, mean_std, GraphStats, LinearFit, MetricsReport};
use crate::seed::{derive_seed, rng_for, stream};
use crate::topology::{generate_connected_topology, Topology};
use crate::wfb::{
    apply_decisions, check_suppression, generate_traffic, per_node_optimal_theta, run_warmup, DecisionKind,
    DecisionRecord,
};

/// Attempts at drawing a connected baseline before a replicate fails.
pub const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Stat { mean, std }
    }
}

/// Replicate aggregate for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: String,
    pub width: f64,
    pub height: f64,
    pub n: usize,
    pub p: Option<f64>,
    pub beta: Option<f64>,
    pub count: usize,
    pub d: Stat,
    pub apl0: Stat,
    pub apl: Stat,
    pub l_ratio: Stat,
    pub c_ratio: Stat,
    pub uni_frac: Stat,
    pub unreach_frac: Stat,
    pub beamformer_frac: Stat,
    /// Beam length over `D`; replicates without beams are skipped.
    pub beam_len_ratio: Stat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub study: String,
    pub fit: LinearFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateDecisions {
    pub region: Region,
    pub beta: f64,
    pub seed: u64,
    pub log: Vec<DecisionRecord>,
    pub suppression_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub study: Study,
    pub rows: Vec<MetricsReport>,
    pub summary: Vec<SummaryRow>,
    pub fits: Vec<FitRow>,
    pub decisions: Vec<ReplicateDecisions>,
}

struct Replicate {
    row: MetricsReport,
    beam_len_ratio: f64,
    decisions: Option<ReplicateDecisions>,
}

pub fn replicate_seed(base: u64, index: usize) -> u64 {
    derive_seed(base, stream::REPLICATE + index as u64)
}

/// `ceil(p N)`, tolerant of `p N` landing a hair above an integer.
pub fn beamformer_count(p: f64, n: usize) -> usize {
    ((p * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

pub fn run_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<SweepOutput> {
    match cfg.study {
        Study::RandP => run_rand_p_sweep(cfg, threads),
        Study::Diameter => run_diameter_sweep(cfg, threads),
        Study::Wfb => run_wfb_sweep(cfg, threads),
    }
}

fn baseline(cfg: &ExperimentConfig, region: &Region, rep: usize) -> Result<(Topology, GraphStats, f64)> {
    let seed = replicate_seed(cfg.seed, rep);
    let topo = generate_connected_topology(cfg.nodes_for(region), region.width, region.height, seed, MAX_RESAMPLES)?
        .with_range(cfg.range)?;
    let stats = GraphStats::compute(&omni_graph(&topo));
    let d = topo.euclidean_diameter();
    Ok((topo, stats, d))
}

#[allow(clippy::too_many_arguments)]
fn report(
    topo: &Topology,
    model: &str,
    p: f64,
    beta: Option<f64>,
    base: &GraphStats,
    stats: &GraphStats,
    beamformers: usize,
    d: f64,
) -> MetricsReport {
    MetricsReport {
        seed: topo.seed(),
        n: topo.len(),
        width: topo.width(),
        height: topo.height(),
        model: model.to_string(),
        p,
        beta,
        baseline_apl: base.apl,
        apl: stats.apl,
        baseline_clustering: base.clustering,
        clustering: stats.clustering,
        unidirectional_pair_fraction: stats.unidirectional_fraction,
        unreachable_pair_fraction: stats.unreachable_fraction,
        beamformer_fraction: beamformers as f64 / topo.len() as f64,
        diameter_d: d,
    }
}

/// All `p` values of one randomized replicate.
fn rand_p_replicate(cfg: &ExperimentConfig, region: &Region, rep: usize, p_values: &[f64]) -> Result<Vec<Replicate>> {
    let (topo, base, d) = baseline(cfg, region, rep)?;
    let n = topo.len();
    let seed = replicate_seed(cfg.seed, rep);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, stream::BEAMFORMERS));
    let mut orng = rng_for(seed, stream::ORIENTATION);
    let orientations: Vec<f64> = (0..n).map(|_| orng.gen::<f64>() * std::f64::consts::TAU).collect();

    let r = topo.range();
    let theta = optimal_beamwidth(&cfg.theta_grid, r, topo.mean_omni_degree())?;
    let length = sector_beam_length(theta, r)?;
    let beam = |v: usize| -> Result<AntennaConfig> {
        Ok(match cfg.model {
            AntennaModel::Sector => AntennaConfig::sector(theta, length, orientations[v])?,
            AntennaModel::Ula => {
                let m = cfg.ula_elements.unwrap_or_else(|| map_sector_to_ula(length, r));
                let peak = cfg.ula_calibrated.then(|| match cfg.ula_elements {
                    Some(m) => f64::from(m) * r,
                    None => length,
                });
                AntennaConfig::ula(m, orientations[v], cfg.alpha, r, peak)
            }
        })
    };
    let model = cfg.model.to_string();
    p_values
        .iter()
        .map(|&p| {
            let k = beamformer_count(p, n);
            let mut configs = crate::linkgraph::omni_configs(&topo);
            for &v in &order[..k] {
                configs[v] = beam(v)?;
            }
            let stats = if k == 0 {
                base
            } else {
                GraphStats::compute(&build_link_graph(&topo, &configs)?)
            };
            Ok(Replicate {
                row: report(&topo, &model, p, None, &base, &stats, k, d),
                beam_len_ratio: length / d,
                decisions: None,
            })
        })
        .collect()
}

/// Runs `unit` for every (region, replicate) pair in parallel; returns the
/// per-unit results in (region, replicate) order.
fn fan_out<T: Send>(
    cfg: &ExperimentConfig,
    threads: usize,
    unit: impl Fn(&Region, usize) -> Result<Vec<T>> + Sync,
) -> Result<Vec<Vec<Vec<T>>>> {
    let units: Vec<(usize, usize)> = (0..cfg.regions.len())
        .flat_map(|g| (0..cfg.replicates).map(move |r| (g, r)))
        .collect();
    let pool = thread_pool(threads)?;
    let flat: Vec<Vec<T>> = pool.install(|| {
        units
            .par_iter()
            .map(|&(g, r)| unit(&cfg.regions[g], r))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut per_region: Vec<Vec<Vec<T>>> = (0..cfg.regions.len()).map(|_| Vec::new()).collect();
    for ((g, _), res) in units.into_iter().zip(flat) {
        per_region[g].push(res);
    }
    Ok(per_region)
}

/// Reorders `[region][replicate][param]` into rows and per-(region, param)
/// summaries.
fn collect(
    cfg: &ExperimentConfig,
    per_region: Vec<Vec<Vec<Replicate>>>,
    params: usize,
    p_of: impl Fn(usize) -> Option<f64>,
    beta_of: impl Fn(usize) -> Option<f64>,
) -> (Vec<MetricsReport>, Vec<SummaryRow>, Vec<ReplicateDecisions>) {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut decisions = Vec::new();
    for (g, mut reps) in per_region.into_iter().enumerate() {
        for j in 0..params {
            let group: Vec<Replicate> = reps
                .iter_mut()
                .map(|r| {
                    let x = &mut r[j];
                    Replicate {
                        row: x.row.clone(),
                        beam_len_ratio: x.beam_len_ratio,
                        decisions: x.decisions.take(),
                    }
                })
                .collect();
            let stat = |f: &dyn Fn(&Replicate) -> f64| {
                Stat::of(&group.iter().map(f).filter(|v| !v.is_nan()).collect::<Vec<_>>())
            };
            let first = &group[0].row;
            summary.push(SummaryRow {
                model: first.model.clone(),
                width: cfg.regions[g].width,
                height: cfg.regions[g].height,
                n: first.n,
                p: p_of(j),
                beta: beta_of(j),
                count: group.len(),
                d: stat(&|r| r.row.diameter_d),
                apl0: stat(&|r| r.row.baseline_apl),
                apl: stat(&|r| r.row.apl),
                l_ratio: stat(&|r| r.row.apl_ratio()),
                c_ratio: stat(&|r| r.row.clustering_ratio()),
                uni_frac: stat(&|r| r.row.unidirectional_pair_fraction),
                unreach_frac: stat(&|r| r.row.unreachable_pair_fraction),
                beamformer_frac: stat(&|r| r.row.beamformer_fraction),
                beam_len_ratio: stat(&|r| r.beam_len_ratio),
            });
            for r in group {
                rows.push(r.row);
                decisions.extend(r.decisions);
            }
        }
    }
    (rows, summary, decisions)
}

fn p_values_with_baseline(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut ps = cfg.p_values.clone();
    if !ps.contains(&0.0) {
        ps.insert(0, 0.0);
    }
    ps
}

/// Randomly chosen beamformers with random orientations, for every `p`.
/// A `p = 0` baseline is always included.
pub fn run_rand_p_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<SweepOutput> {
    cfg.validate()?;
    let ps = p_values_with_baseline(cfg);
    let per_region = fan_out(cfg, threads, |region, rep| rand_p_replicate(cfg, region, rep, &ps))?;
    let (rows, summary, _) = collect(cfg, per_region, ps.len(), |j| Some(ps[j]), |_| None);
    Ok(SweepOutput {
        study: Study::RandP,
        rows,
        summary,
        fits: Vec::new(),
        decisions: Vec::new(),
    })
}

/// Randomized beamforming over growing regions at constant density, with a
/// log and a linear fit of mean APL against mean `D` for each `p`.
pub fn run_diameter_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<SweepOutput> {
    cfg.validate()?;
    let ps = cfg.p_values.clone();
    let per_region = fan_out(cfg, threads, |region, rep| rand_p_replicate(cfg, region, rep, &ps))?;
    let (rows, summary, _) = collect(cfg, per_region, ps.len(), |j| Some(ps[j]), |_| None);
    let mut fits = Vec::new();
    for &p in &ps {
        let points: Vec<(f64, f64)> = summary
            .iter()
            .filter(|s| s.p == Some(p))
            .map(|s| (s.d.mean, s.apl.mean))
            .collect();
        let label = format!("{}/{}/p={}", Study::Diameter, cfg.model, p);
        fits.push(FitRow {
            study: format!("{label}/log"),
            fit: log_growth_fit(&points)?,
        });
        fits.push(FitRow {
            study: format!("{label}/linear"),
            fit: linear_fit(&points)?,
        });
    }
    Ok(SweepOutput {
        study: Study::Diameter,
        rows,
        summary,
        fits,
        decisions: Vec::new(),
    })
}

fn wfb_replicate(cfg: &ExperimentConfig, region: &Region, rep: usize) -> Result<Vec<Replicate>> {
    let (topo, base, d) = baseline(cfg, region, rep)?;
    let seed = replicate_seed(cfg.seed, rep);
    let flows = generate_traffic(&topo, cfg.source_fraction, seed)?;
    let warm = run_warmup(&topo, &flows, seed);
    let thetas = per_node_optimal_theta(&topo, &cfg.theta_grid)?;
    cfg.betas
        .iter()
        .map(|&beta| {
            let mut states = warm.states.clone();
            let (configs, log) = apply_decisions(&topo, &mut states, beta, &thetas)?;
            let lengths: Vec<f64> = log
                .iter()
                .filter(|r| r.decision == DecisionKind::Beamform)
                .map(|r| sector_beam_length(r.theta.expect("beamformer has a width"), topo.range()))
                .collect::<Result<_>>()?;
            let k = lengths.len();
            let stats = if k == 0 {
                base
            } else {
                GraphStats::compute(&build_link_graph(&topo, &configs)?)
            };
            let beam_len_ratio = if k == 0 {
                f64::NAN
            } else {
                lengths.iter().sum::<f64>() / k as f64 / d
            };
            let suppression_ok = check_suppression(&topo, &configs, &log);
            if !suppression_ok {
                log::error!("suppression violated: region {region} seed {}", topo.seed());
            }
            let p = k as f64 / topo.len() as f64;
            Ok(Replicate {
                row: report(&topo, "sector", p, Some(beta), &base, &stats, k, d),
                beam_len_ratio,
                decisions: Some(ReplicateDecisions {
                    region: *region,
                    beta,
                    seed: topo.seed(),
                    log,
                    suppression_ok,
                }),
            })
        })
        .collect()
}

/// Warm-up traffic, beam decisions and metrics for every region and `beta`.
pub fn run_wfb_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<SweepOutput> {
    cfg.validate()?;
    let per_region = fan_out(cfg, threads, |region, rep| wfb_replicate(cfg, region, rep))?;
    let (rows, summary, decisions) = collect(cfg, per_region, cfg.betas.len(), |_| None, |j| Some(cfg.betas[j]));
    Ok(SweepOutput {
        study: Study::Wfb,
        rows,
        summary,
        fits: Vec::new(),
        decisions,
    })
}

const SUMMARY_KEYS: [&str; 7] = ["model", "width", "height", "n", "p", "beta", "count"];
const SUMMARY_STATS: [&str; 9] = [
    "d",
    "apl0",
    "apl",
    "l_ratio",
    "c_ratio",
    "uni_frac",
    "unreach_frac",
    "beamformer_frac",
    "beam_len_ratio",
];

fn summary_header() -> Vec<String> {
    let mut h: Vec<String> = SUMMARY_KEYS.iter().map(|s| s.to_string()).collect();
    for s in SUMMARY_STATS {
        h.push(format!("{s}_mean"));
        h.push(format!("{s}_std"));
    }
    h
}

impl SummaryRow {
    fn stats(&self) -> [Stat; 9] {
        [
            self.d,
            self.apl0,
            self.apl,
            self.l_ratio,
            self.c_ratio,
            self.uni_frac,
            self.unreach_frac,
            self.beamformer_frac,
            self.beam_len_ratio,
        ]
    }
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(summary_header())?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            r.model.clone(),
            r.width.to_string(),
            r.height.to_string(),
            r.n.to_string(),
            opt(r.p),
            opt(r.beta),
            r.count.to_string(),
        ];
        for s in r.stats() {
            rec.push(s.mean.to_string());
            rec.push(s.std.to_string());
        }
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary<R: Read>(input: R, origin: &Path) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != summary_header() {
        return Err(Error::parse(origin, "unexpected summary header"));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |i: usize| Error::parse(origin, format!("row {line}: bad `{}`", header[i]));
        let f = |i: usize| rec.get(i).unwrap_or("").parse::<f64>().map_err(|_| bad(i));
        let opt = |i: usize| match rec.get(i).unwrap_or("") {
            "" => Ok(None),
            _ => f(i).map(Some),
        };
        let stat = |k: usize| -> Result<Stat> {
            Ok(Stat {
                mean: f(7 + 2 * k)?,
                std: f(8 + 2 * k)?,
            })
        };
        rows.push(SummaryRow {
            model: rec.get(0).unwrap_or("").to_string(),
            width: f(1)?,
            height: f(2)?,
            n: rec.get(3).unwrap_or("").parse().map_err(|_| bad(3))?,
            p: opt(4)?,
            beta: opt(5)?,
            count: rec.get(6).unwrap_or("").parse().map_err(|_| bad(6))?,
            d: stat(0)?,
            apl0: stat(1)?,
            apl: stat(2)?,
            l_ratio: stat(3)?,
            c_ratio: stat(4)?,
            uni_frac: stat(5)?,
            unreach_frac: stat(6)?,
            beamformer_frac: stat(7)?,
            beam_len_ratio: stat(8)?,
        });
    }
    Ok(rows)
}

pub fn write_fits<W: Write>(out: W, fits: &[FitRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["study", "slope", "intercept", "r2"])?;
    for f in fits {
        w.write_record([
            f.study.clone(),
            f.fit.slope.to_string(),
            f.fit.intercept.to_string(),
            f.fit.r_squared.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fits<R: Read>(input: R, origin: &Path) -> Result<Vec<FitRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["study", "slope", "intercept", "r2"] {
        return Err(Error::parse(origin, "expected header study,slope,intercept,r2"));
    }
    let mut fits = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let f = |i: usize| {
            rec.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|_| Error::parse(origin, format!("row {line}: bad number")))
        };
        fits.push(FitRow {
            study: rec.get(0).unwrap_or("").to_string(),
            fit: LinearFit {
                slope: f(1)?,
                intercept: f(2)?,
                r_squared: f(3)?,
            },
        });
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(study: Study) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(study);
        cfg.replicates = 3;
        cfg.n_nodes = None;
        cfg.regions = vec![Region {
            width: 5.0,
            height: 5.0,
        }];
        cfg
    }

    #[test]
    fn count_rounding() {
        assert_eq!(beamformer_count(0.1, 300), 30);
        assert_eq!(beamformer_count(0.3, 10), 3);
        assert_eq!(beamformer_count(0.01, 300), 3);
        assert_eq!(beamformer_count(0.011, 300), 4);
        assert_eq!(beamformer_count(0.0, 300), 0);
        assert_eq!(beamformer_count(1.0, 300), 300);
    }

    #[test]
    fn rand_p_baseline_rows() {
        let mut cfg = small(Study::RandP);
        cfg.p_values = vec![0.5];
        let out = run_rand_p_sweep(&cfg, 2).unwrap();
        // p = 0 added in front
        assert_eq!(out.summary.len(), 2);
        assert_eq!(out.rows.len(), 6);
        for row in out.rows.iter().filter(|r| r.p == 0.0) {
            assert_eq!(row.apl, row.baseline_apl);
            assert_eq!(row.clustering, row.baseline_clustering);
            assert_eq!(row.unidirectional_pair_fraction, 0.0);
        }
        assert_eq!(out.summary[0].l_ratio.mean, 1.0);
        assert_eq!(out.summary[0].c_ratio.mean, 1.0);
    }

    #[test]
    fn ula_single_element_is_omni() {
        let mut cfg = small(Study::RandP);
        cfg.model = AntennaModel::Ula;
        cfg.ula_elements = Some(1);
        cfg.p_values = vec![1.0];
        let out = run_rand_p_sweep(&cfg, 1).unwrap();
        for row in &out.rows {
            assert_eq!(row.apl, row.baseline_apl);
            assert_eq!(row.clustering, row.baseline_clustering);
            assert_eq!(row.unidirectional_pair_fraction, 0.0);
        }
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let mut cfg = small(Study::Wfb);
        cfg.betas = vec![0.2, 0.5];
        let a = run_wfb_sweep(&cfg, 1).unwrap();
        let b = run_wfb_sweep(&cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 6);
        assert!(a.decisions.iter().all(|d| d.suppression_ok));
    }

    #[test]
    fn wfb_zero_beta_keeps_baseline() {
        let mut cfg = small(Study::Wfb);
        cfg.betas = vec![0.0];
        let out = run_wfb_sweep(&cfg, 0).unwrap();
        for row in &out.rows {
            assert_eq!(row.beamformer_fraction, 0.0);
            assert_eq!(row.apl, row.baseline_apl);
            assert_eq!(row.clustering, row.baseline_clustering);
        }
    }

    #[test]
    fn diameter_needs_three_regions() {
        let mut cfg = small(Study::Diameter);
        assert!(run_diameter_sweep(&cfg, 1).is_err());
        cfg.regions = [4.0, 5.0, 6.0].map(|s| Region { width: s, height: s }).to_vec();
        let out = run_diameter_sweep(&cfg, 0).unwrap();
        assert_eq!(out.fits.len(), 4);
    }

    #[test]
    fn summary_and_fit_round_trip() {
        let mut cfg = small(Study::Diameter);
        cfg.regions = [4.0, 5.0, 6.0].map(|s| Region { width: s, height: s }).to_vec();
        let out = run_diameter_sweep(&cfg, 0).unwrap();
        let mut buf = Vec::new();
        write_summary(&mut buf, &out.summary).unwrap();
        assert_eq!(read_summary(buf.as_slice(), Path::new("mem")).unwrap(), out.summary);
        let mut buf = Vec::new();
        write_fits(&mut buf, &out.fits).unwrap();
        assert_eq!(read_fits(buf.as_slice(), Path::new("mem")).unwrap(), out.fits);
    }
}
