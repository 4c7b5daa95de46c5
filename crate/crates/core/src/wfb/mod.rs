//! Wireless Flow Betweenness: a traffic-driven centrality each node computes
//! from transmissions it overhears.
//!
//! Every node starts with `w = 1` and one virtual forwarded packet (`g = 1`),
//! which keeps every denominator below positive. A node only knows the
//! neighbours it has actually overheard; unheard neighbours are left out of
//! every sum.
//!
//! Summation order is fixed so that replays are bit-exact: the own term
//! first, then neighbour terms in ascending node id. On overhear, the
//! transmitter's fresh term is added to that partial sum last.

mod decision;
mod traffic;
mod warmup;

use std::collections::BTreeMap;

pub use decision::{
    apply_decisions, beam_decision, check_suppression, choose_orientation, per_node_optimal_theta, read_decision_log,
    write_decision_log, DecisionKind, DecisionRecord,
};
pub use traffic::{generate_traffic, min_hop_route, Flow};
pub use warmup::{read_event_log, run_warmup, slot_schedule, write_event_log, ScheduledHop, TransmitEvent, Warmup};

use crate::topology::{NodeId, Point};

/// What a node remembers about one overheard neighbour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborRecord {
    pub w: f64,
    pub g: u64,
    pub position: Point,
    /// Largest packet hop count seen on a transmission from this neighbour.
    pub max_hop_count: u32,
    pub last_seen_slot: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WfbNodeState {
    pub id: NodeId,
    pub position: Point,
    pub w: f64,
    pub g: u64,
    pub neighbor_table: BTreeMap<NodeId, NeighborRecord>,
    pub beamformed: bool,
    pub suppressed: bool,
}

impl WfbNodeState {
    pub fn new(id: NodeId, position: Point) -> Self {
        WfbNodeState {
            id,
            position,
            w: 1.0,
            g: 1,
            neighbor_table: BTreeMap::new(),
            beamformed: false,
            suppressed: false,
        }
    }

    /// Own `g/w` term plus that of every overheard neighbour except `skip`.
    fn flow_sum(&self, skip: Option<NodeId>) -> f64 {
        let mut sum = self.g as f64 / self.w;
        for (id, rec) in &self.neighbor_table {
            if Some(*id) != skip {
                sum += rec.g as f64 / rec.w;
            }
        }
        sum
    }

    /// Mean of the last overheard `w` values, if any neighbour was heard.
    pub fn neighborhood_average(&self) -> Option<f64> {
        if self.neighbor_table.is_empty() {
            return None;
        }
        let sum: f64 = self.neighbor_table.values().map(|r| r.w).sum();
        Some(sum / self.neighbor_table.len() as f64)
    }
}

/// Share of the packets forwarded in `v`'s neighbourhood that `v` forwarded.
pub fn simple_betweenness(state: &WfbNodeState) -> f64 {
    let mut total = state.g as f64;
    for rec in state.neighbor_table.values() {
        total += rec.g as f64;
    }
    state.g as f64 / total
}

/// Transmit-time update. Counts the outgoing packet, then recomputes `w`
/// from the previous own values and the last known neighbour values.
/// Returns the `(w, g)` pair attached to the packet.
pub fn wfb_on_transmit(state: &mut WfbNodeState) -> (f64, u64) {
    let sum = state.flow_sum(None);
    let w_prev = state.w;
    state.g += 1;
    state.w = state.g as f64 / (w_prev * sum);
    (state.w, state.g)
}

/// Overhear-time update at `state` for a packet sent by `transmitter`
/// carrying `(w_tx, g_tx)`. The transmitter's fresh values replace its old
/// ones in the sum; everyone else keeps their previous values.
pub fn wfb_on_overhear(
    state: &mut WfbNodeState,
    transmitter: NodeId,
    transmitter_position: Point,
    w_tx: f64,
    g_tx: u64,
    hop_count: u32,
    slot: u64,
) -> f64 {
    let others = state.flow_sum(Some(transmitter));
    let bracket = g_tx as f64 / w_tx + others;
    state.w = state.g as f64 / (state.w * bracket);
    let entry = state.neighbor_table.entry(transmitter).or_insert(NeighborRecord {
        w: w_tx,
        g: g_tx,
        position: transmitter_position,
        max_hop_count: 0,
        last_seen_slot: slot,
    });
    entry.w = w_tx;
    entry.g = g_tx;
    entry.position = transmitter_position;
    entry.max_hop_count = entry.max_hop_count.max(hop_count);
    entry.last_seen_slot = slot;
    state.w
}
