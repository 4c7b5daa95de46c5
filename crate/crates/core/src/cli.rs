//! Command-line front end.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::antenna::{default_theta_grid, map_sector_to_ula, optimal_beamwidth, sector_beam_length, AntennaConfig};
use crate::config::{AntennaModel, ExperimentConfig, Study};
use crate::error::{Error, Result};
use crate::experiments::{beamformer_count, run_sweep, write_fits, write_summary};
use crate::linkgraph::{build_link_graph, omni_configs, omni_graph, DirectedLinkGraph};
use crate::metrics::{write_reports, GraphStats, MetricsReport};
use crate::plotdata::{emit_plotdata, Figure};
use crate::seed::{rng_for, stream};
use crate::topology::{generate_topology, Topology};
use crate::wfb::{
    apply_decisions, check_suppression, generate_traffic, per_node_optimal_theta, run_warmup, write_decision_log,
    write_event_log,
};

/// Environment variable capping replicate parallelism; 0 or unset = all cores.
pub const THREADS_ENV: &str = "SWBEAM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "swbeam",
    version,
    about = "Small-world self-organization of wireless ad hoc networks with directional beams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place nodes uniformly at random and write the topology CSV and sidecar.
    Generate(GenerateArgs),
    /// Give a random fraction of nodes randomly oriented beams.
    Randbeam(RandbeamArgs),
    /// Run warm-up traffic and the centrality-driven beam decisions.
    Wfb(WfbArgs),
    /// Run a configured sweep over seeded replicates.
    Sweep(SweepArgs),
    /// Compute metrics of an edge list against its omni baseline.
    Metrics(MetricsArgs),
    /// Turn a results table into plot-ready data files.
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub width: f64,
    #[arg(long)]
    pub height: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Omni range r.
    #[arg(long, default_value_t = 1.0)]
    pub range: f64,
    /// Resample with seed + 1, seed + 2, ... until the omni graph is connected.
    #[arg(long)]
    pub connected: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Sector,
    Ula,
}

impl From<ModelArg> for AntennaModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Sector => AntennaModel::Sector,
            ModelArg::Ula => AntennaModel::Ula,
        }
    }
}

#[derive(Debug, Args)]
pub struct RandbeamArgs {
    #[arg(long)]
    pub topo: PathBuf,
    /// Fraction of beamforming nodes.
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModelArg::Sector)]
    pub model: ModelArg,
    /// Sector beam width in radians; default is the optimal width for the mean degree.
    #[arg(long)]
    pub theta: Option<f64>,
    /// ULA path-loss exponent.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// ULA element count; default maps the optimal sector length.
    #[arg(long)]
    pub elements: Option<u32>,
    /// Plain r * G^(1/alpha) ULA reach instead of peak = sector length.
    #[arg(long)]
    pub uncalibrated: bool,
    /// Edge list output.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics row output; stdout when absent.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WfbArgs {
    #[arg(long)]
    pub topo: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub source_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Transmission event log output.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Decision log output.
    #[arg(long)]
    pub decisions: Option<PathBuf>,
    /// Edge list output.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics row output; stdout when absent.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StudyArg {
    #[value(name = "rand_p")]
    RandP,
    Diameter,
    Wfb,
}

impl From<StudyArg> for Study {
    fn from(s: StudyArg) -> Self {
        match s {
            StudyArg::RandP => Study::RandP,
            StudyArg::Diameter => Study::Diameter,
            StudyArg::Wfb => Study::Wfb,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub study: StudyArg,
    /// `key = value` experiment config; study defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Per-replicate results table.
    #[arg(long)]
    pub out: PathBuf,
    /// Fit table; defaults to `fit.csv` beside `--out`.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Replicate summary; defaults to `<out stem>_summary.csv`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Directory for per-replicate decision logs (wfb only).
    #[arg(long)]
    pub decisions_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub topo: PathBuf,
    #[arg(long)]
    pub edges: PathBuf,
    /// Output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    Fig2a,
    Fig2b,
    Fig3,
    Fig5a,
    Fig5b,
}

impl From<FigureArg> for Figure {
    fn from(f: FigureArg) -> Self {
        match f {
            FigureArg::Fig2a => Figure::Fig2a,
            FigureArg::Fig2b => Figure::Fig2b,
            FigureArg::Fig3 => Figure::Fig3,
            FigureArg::Fig5a => Figure::Fig5a,
            FigureArg::Fig5b => Figure::Fig5b,
        }
    }
}

#[derive(Debug, Args)]
pub struct PlotdataArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, value_enum)]
    pub figure: FigureArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

impl Cli {
    /// Cross-flag checks clap cannot express.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if let Command::Randbeam(a) = &self.command {
            if a.model == ModelArg::Ula && a.theta.is_some() {
                return Err("--theta applies to the sector model only; drop it or use --model sector".into());
            }
            if a.model == ModelArg::Sector && (a.elements.is_some() || a.uncalibrated) {
                return Err("--elements and --uncalibrated apply to --model ula only".into());
            }
        }
        Ok(())
    }
}

/// Parses and validates `argv` (program name first).
pub fn parse_cli<I, T>(argv: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    cli.validate()
        .map_err(|msg| Cli::command().error(clap::error::ErrorKind::ArgumentConflict, msg))?;
    Ok(cli)
}

pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn report_for(
    topo: &Topology,
    model: &str,
    p: f64,
    beta: Option<f64>,
    graph: &DirectedLinkGraph,
    beamformers: usize,
) -> MetricsReport {
    let base = GraphStats::compute(&omni_graph(topo));
    let stats = GraphStats::compute(graph);
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
        diameter_d: topo.euclidean_diameter(),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => {
            let topo = if a.connected {
                crate::topology::generate_connected_topology(a.nodes, a.width, a.height, a.seed, 1000)?
            } else {
                generate_topology(a.nodes, a.width, a.height, a.seed)?
            };
            topo.with_range(a.range)?.save(&a.out)
        }
        Command::Randbeam(a) => {
            if !(0.0..=1.0).contains(&a.p) {
                return Err(Error::Config(format!("--p {} outside [0, 1]", a.p)));
            }
            let topo = Topology::load(&a.topo)?;
            let n = topo.len();
            let r = topo.range();
            let theta = match a.theta {
                Some(t) => t,
                None => optimal_beamwidth(&default_theta_grid(8), r, topo.mean_omni_degree())?,
            };
            let length = sector_beam_length(theta, r)?;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng_for(a.seed, stream::BEAMFORMERS));
            let mut orng = rng_for(a.seed, stream::ORIENTATION);
            let orientations: Vec<f64> = (0..n).map(|_| orng.gen::<f64>() * std::f64::consts::TAU).collect();
            let k = beamformer_count(a.p, n);
            let mut configs = omni_configs(&topo);
            for &v in &order[..k] {
                configs[v] = match a.model {
                    ModelArg::Sector => AntennaConfig::sector(theta, length, orientations[v])?,
                    ModelArg::Ula => {
                        let m = a.elements.unwrap_or_else(|| map_sector_to_ula(length, r));
                        let peak = (!a.uncalibrated).then(|| a.elements.map_or(length, |m| f64::from(m) * r));
                        AntennaConfig::ula(m, orientations[v], a.alpha, r, peak)
                    }
                };
            }
            let graph = build_link_graph(&topo, &configs)?;
            graph.save_edge_list(&a.out)?;
            let model = AntennaModel::from(a.model).to_string();
            let row = report_for(&topo, &model, a.p, None, &graph, k);
            write_reports(output(a.metrics.as_deref())?, &[row])
        }
        Command::Wfb(a) => {
            let topo = Topology::load(&a.topo)?;
            let flows = generate_traffic(&topo, a.source_fraction, a.seed)?;
            let mut warm = run_warmup(&topo, &flows, a.seed);
            let thetas = per_node_optimal_theta(&topo, &default_theta_grid(8))?;
            let (configs, log) = apply_decisions(&topo, &mut warm.states, a.beta, &thetas)?;
            if !check_suppression(&topo, &configs, &log) {
                log::error!("suppression invariant violated");
            }
            if let Some(p) = &a.events {
                write_event_log(File::create(p)?, &warm.events)?;
            }
            if let Some(p) = &a.decisions {
                write_decision_log(File::create(p)?, &log)?;
            }
            let graph = build_link_graph(&topo, &configs)?;
            graph.save_edge_list(&a.out)?;
            let k = configs.iter().filter(|c| c.is_directional()).count();
            let row = report_for(&topo, "sector", k as f64 / topo.len() as f64, Some(a.beta), &graph, k);
            write_reports(output(a.metrics.as_deref())?, &[row])
        }
        Command::Sweep(a) => {
            let study = Study::from(a.study);
            let cfg = match &a.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let with_study = if text.lines().any(|l| l.trim_start().starts_with("study")) {
                        text
                    } else {
                        format!("study = {}\n{text}", study_key(study))
                    };
                    ExperimentConfig::parse(&with_study)?
                }
                None => ExperimentConfig::defaults(study),
            };
            if cfg.study != study {
                return Err(Error::Config(format!(
                    "config study {} does not match --study {}",
                    cfg.study, study
                )));
            }
            let out = run_sweep(&cfg, threads_from_env())?;
            crate::metrics::save_reports(&a.out, &out.rows)?;
            let summary = a.summary.clone().unwrap_or_else(|| sibling(&a.out, "_summary.csv"));
            write_summary(File::create(summary)?, &out.summary)?;
            if !out.fits.is_empty() {
                let fit = a
                    .fit
                    .clone()
                    .unwrap_or_else(|| a.out.parent().unwrap_or(Path::new("")).join("fit.csv"));
                write_fits(File::create(fit)?, &out.fits)?;
            }
            if let Some(dir) = &a.decisions_dir {
                std::fs::create_dir_all(dir)?;
                for d in &out.decisions {
                    let name = format!("decisions_{}_beta{}_seed{}.csv", d.region, d.beta, d.seed);
                    write_decision_log(File::create(dir.join(name))?, &d.log)?;
                }
            }
            let bad = out.decisions.iter().filter(|d| !d.suppression_ok).count();
            if bad > 0 {
                return Err(Error::Config(format!(
                    "{bad} replicates violated the suppression invariant"
                )));
            }
            Ok(())
        }
        Command::Metrics(a) => {
            let topo = Topology::load(&a.topo)?;
            let graph = DirectedLinkGraph::load_edge_list(&a.edges, topo.len())?;
            let omni = omni_graph(&topo);
            // beamformers are nodes whose out-links differ from the omni disc
            let k = (0..topo.len())
                .filter(|&v| graph.out_neighbors(v) != omni.out_neighbors(v))
                .count();
            let row = report_for(&topo, "edges", k as f64 / topo.len() as f64, None, &graph, k);
            write_reports(output(a.out.as_deref())?, &[row])
        }
        Command::Plotdata(a) => {
            let rows = crate::metrics::load_reports(&a.results)?;
            for path in emit_plotdata(&rows, a.figure.into(), &a.out_dir)? {
                log::info!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn study_key(s: Study) -> &'static str {
    match s {
        Study::RandP => "rand_p",
        Study::Diameter => "diameter",
        Study::Wfb => "wfb",
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    path.with_file_name(format!("{stem}{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        let cli = parse_cli([
            "swbeam", "generate", "--nodes", "300", "--width", "10", "--height", "10", "--seed", "42", "--out",
            "topo.csv",
        ])
        .unwrap();
        assert!(matches!(
            cli.command,
            Command::Generate(GenerateArgs {
                nodes: 300,
                seed: 42,
                ..
            })
        ));
        let cli = parse_cli([
            "swbeam",
            "sweep",
            "--study",
            "rand_p",
            "--config",
            "exp.cfg",
            "--out",
            "results.csv",
        ])
        .unwrap();
        assert!(matches!(
            cli.command,
            Command::Sweep(SweepArgs {
                study: StudyArg::RandP,
                ..
            })
        ));
    }

    #[test]
    fn usage_errors() {
        assert!(parse_cli(["swbeam", "randbeam"]).is_err());
        assert!(parse_cli(["swbeam", "randbeam", "--p", "0.1", "--out", "e.csv"]).is_err());
        assert!(parse_cli(["swbeam", "generate", "--nodes", "3", "--bogus", "1"]).is_err());
        let e = parse_cli([
            "swbeam", "randbeam", "--topo", "t.csv", "--p", "0.1", "--out", "e.csv", "--model", "ula", "--theta", "0.5",
        ])
        .unwrap_err();
        assert_eq!(e.kind(), clap::error::ErrorKind::ArgumentConflict);
        assert_ne!(e.exit_code(), 0);
    }
}
