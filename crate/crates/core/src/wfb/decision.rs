//! Turning warm-up centrality into beams.
//!
//! Nodes are visited in descending `w` (ties: lower id first). A node that
//! has not been suppressed beamforms when its `w` lies within `beta * w` of
//! its neighbourhood mean; it then announces over its omni disc and over the
//! new beam, and every node in either footprint is suppressed.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::WfbNodeState;
use crate::antenna::{optimal_beamwidth, sector_beam_length, AntennaConfig};
use crate::error::{Error, Result};
use crate::linkgraph::{covered_nodes, omni_configs};
use crate::topology::{NodeId, Topology};

/// `|avg(w over heard neighbours) - w| < beta * w`. Never true without
/// overheard neighbours.
pub fn beam_decision(state: &WfbNodeState, beta: f64) -> bool {
    match state.neighborhood_average() {
        Some(avg) => (avg - state.w).abs() < beta * state.w,
        None => false,
    }
}

/// Bearing toward the neighbour that delivered the largest hop count; ties go
/// to the most recently heard neighbour, then the lowest id. Without any hop
/// record, the farthest known neighbour. `None` for an empty table.
pub fn choose_orientation(state: &WfbNodeState) -> Option<f64> {
    let table = &state.neighbor_table;
    let by_hops = table
        .iter()
        .filter(|(_, r)| r.max_hop_count > 0)
        .max_by(|(ia, a), (ib, b)| {
            a.max_hop_count
                .cmp(&b.max_hop_count)
                .then(a.last_seen_slot.cmp(&b.last_seen_slot))
                .then(ib.cmp(ia))
        });
    let target = match by_hops {
        Some((_, r)) => r.position,
        None => {
            let (_, r) = table.iter().max_by(|(ia, a), (ib, b)| {
                let da = state.position.distance(&a.position);
                let db = state.position.distance(&b.position);
                da.total_cmp(&db).then(ib.cmp(ia))
            })?;
            r.position
        }
    };
    Some(state.position.bearing_to(&target))
}

/// Optimal beam width for every node, using its own omni degree as the
/// neighbourhood size.
pub fn per_node_optimal_theta(topo: &Topology, candidates: &[f64]) -> Result<Vec<f64>> {
    topo.nodes()
        .map(|v| optimal_beamwidth(candidates, topo.range(), topo.omni_degree(v) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionKind {
    Beamform,
    /// Condition not met.
    Stay,
    /// Never overheard anyone.
    Blind,
    Suppressed,
}

impl fmt::Display for DecisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecisionKind::Beamform => "beamform",
            DecisionKind::Stay => "stay",
            DecisionKind::Blind => "blind",
            DecisionKind::Suppressed => "suppressed",
        })
    }
}

impl FromStr for DecisionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "beamform" => Ok(DecisionKind::Beamform),
            "stay" => Ok(DecisionKind::Stay),
            "blind" => Ok(DecisionKind::Blind),
            "suppressed" => Ok(DecisionKind::Suppressed),
            other => Err(format!("unknown decision `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    pub order: usize,
    pub node: NodeId,
    pub w: f64,
    pub decision: DecisionKind,
    pub suppressor: Option<NodeId>,
    pub orientation: Option<f64>,
    pub theta: Option<f64>,
}

pub fn apply_decisions(
    topo: &Topology,
    states: &mut [WfbNodeState],
    beta: f64,
    theta_per_node: &[f64],
) -> Result<(Vec<AntennaConfig>, Vec<DecisionRecord>)> {
    if states.len() != topo.len() || theta_per_node.len() != topo.len() {
        return Err(Error::ConfigLengthMismatch {
            configs: states.len().min(theta_per_node.len()),
            nodes: topo.len(),
        });
    }
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|&a, &b| states[b].w.total_cmp(&states[a].w).then(a.cmp(&b)));

    let mut configs = omni_configs(topo);
    let mut suppressor: Vec<Option<NodeId>> = vec![None; states.len()];
    let mut log = Vec::with_capacity(states.len());

    for (rank, &v) in order.iter().enumerate() {
        let state = &states[v];
        let mut rec = DecisionRecord {
            order: rank,
            node: NodeId(v),
            w: state.w,
            decision: DecisionKind::Stay,
            suppressor: None,
            orientation: None,
            theta: None,
        };
        if state.suppressed {
            rec.decision = DecisionKind::Suppressed;
            rec.suppressor = suppressor[v];
        } else if state.neighbor_table.is_empty() {
            rec.decision = DecisionKind::Blind;
        } else if beam_decision(state, beta) {
            let theta = theta_per_node[v];
            let orientation = choose_orientation(state).expect("non-empty table");
            let cfg = AntennaConfig::sector(theta, sector_beam_length(theta, topo.range())?, orientation)?;
            configs[v] = cfg;
            states[v].beamformed = true;
            let mut footprint = topo.omni_neighbors(NodeId(v));
            footprint.extend(covered_nodes(topo, NodeId(v), &cfg));
            for u in footprint {
                let s = &mut states[u.0];
                if !s.suppressed && !s.beamformed {
                    s.suppressed = true;
                    suppressor[u.0] = Some(NodeId(v));
                }
            }
            rec.decision = DecisionKind::Beamform;
            rec.orientation = Some(match cfg {
                AntennaConfig::Sector { orientation, .. } => orientation,
                _ => unreachable!(),
            });
            rec.theta = Some(theta);
        }
        log.push(rec);
    }
    Ok((configs, log))
}

/// True iff no beamformer sits in the omni disc or beam footprint of a
/// beamformer decided before it.
pub fn check_suppression(topo: &Topology, configs: &[AntennaConfig], log: &[DecisionRecord]) -> bool {
    let beamformers: Vec<NodeId> = log
        .iter()
        .filter(|r| r.decision == DecisionKind::Beamform)
        .map(|r| r.node)
        .collect();
    for (i, &later) in beamformers.iter().enumerate() {
        for &earlier in &beamformers[..i] {
            let pe = topo.position(earlier);
            let pl = topo.position(later);
            if pe.distance(&pl) <= topo.range() || configs[earlier.0].covers(&pe, &pl) {
                return false;
            }
        }
    }
    true
}

const DECISION_COLUMNS: [&str; 7] = [
    "order",
    "node",
    "w",
    "decision",
    "suppressor",
    "orientation_rad",
    "theta_rad",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_decision_log<W: Write>(out: W, log: &[DecisionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DECISION_COLUMNS)?;
    for r in log {
        w.write_record([
            r.order.to_string(),
            r.node.to_string(),
            r.w.to_string(),
            r.decision.to_string(),
            opt(r.suppressor),
            opt(r.orientation),
            opt(r.theta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_decision_log<R: Read>(input: R, origin: &Path) -> Result<Vec<DecisionRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != DECISION_COLUMNS {
        return Err(Error::parse(
            origin,
            format!("expected header {}", DECISION_COLUMNS.join(",")),
        ));
    }
    let mut log = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |i: usize| Error::parse(origin, format!("row {row}: bad `{}`", DECISION_COLUMNS[i]));
        let opt_f64 = |i: usize| -> Result<Option<f64>> {
            match field(i) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(i)),
            }
        };
        log.push(DecisionRecord {
            order: field(0).parse().map_err(|_| bad(0))?,
            node: NodeId(field(1).parse().map_err(|_| bad(1))?),
            w: field(2).parse().map_err(|_| bad(2))?,
            decision: field(3).parse().map_err(|_| bad(3))?,
            suppressor: match field(4) {
                "" => None,
                s => Some(NodeId(s.parse().map_err(|_| bad(4))?)),
            },
            orientation: opt_f64(5)?,
            theta: opt_f64(6)?,
        });
    }
    Ok(log)
}
