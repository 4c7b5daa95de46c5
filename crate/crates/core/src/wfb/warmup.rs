//! Slot-by-slot forwarding of the warm-up traffic on the all-omni network.
//!
//! One transmitter per global slot. Active flows are served round-robin in
//! an order shuffled once by the schedule seed; each turn advances a flow by
//! one hop. Every transmission updates the sender and then every omni
//! neighbour of the sender, in ascending id.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;

use super::{wfb_on_overhear, wfb_on_transmit, Flow, WfbNodeState};
use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledHop {
    pub slot: u64,
    pub transmitter: NodeId,
    pub flow: usize,
    pub hop_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitEvent {
    pub slot: u64,
    pub transmitter: NodeId,
    pub flow_src: NodeId,
    pub flow_dst: NodeId,
    pub hop_index: usize,
    pub w_after: f64,
    pub g_after: u64,
}

impl TransmitEvent {
    /// Hop count carried by the packet after this transmission.
    pub fn hop_count(&self) -> u32 {
        self.hop_index as u32 + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Warmup {
    pub states: Vec<WfbNodeState>,
    pub events: Vec<TransmitEvent>,
}

/// Slots start at 1; slot 0 is the initial state.
pub fn slot_schedule(flows: &[Flow], seed: u64) -> Vec<ScheduledHop> {
    let mut order: Vec<usize> = (0..flows.len()).collect();
    order.shuffle(&mut rng_for(seed, stream::SCHEDULE));
    let mut schedule = Vec::with_capacity(flows.iter().map(Flow::hops).sum());
    let mut slot = 0u64;
    let mut hop = 0usize;
    while !order.is_empty() {
        for &f in &order {
            slot += 1;
            schedule.push(ScheduledHop {
                slot,
                transmitter: flows[f].route[hop],
                flow: f,
                hop_index: hop,
            });
        }
        hop += 1;
        order.retain(|&f| flows[f].hops() > hop);
    }
    schedule
}

pub fn run_warmup(topo: &Topology, flows: &[Flow], seed: u64) -> Warmup {
    let mut states: Vec<WfbNodeState> = topo.nodes().map(|v| WfbNodeState::new(v, topo.position(v))).collect();
    let neighbors: Vec<Vec<NodeId>> = topo.nodes().map(|v| topo.omni_neighbors(v)).collect();
    let schedule = slot_schedule(flows, seed);
    let mut events = Vec::with_capacity(schedule.len());
    for hop in schedule {
        let v = hop.transmitter;
        let (w, g) = wfb_on_transmit(&mut states[v.0]);
        let hop_count = hop.hop_index as u32 + 1;
        let pos = topo.position(v);
        for &u in &neighbors[v.0] {
            wfb_on_overhear(&mut states[u.0], v, pos, w, g, hop_count, hop.slot);
        }
        let flow = &flows[hop.flow];
        events.push(TransmitEvent {
            slot: hop.slot,
            transmitter: v,
            flow_src: flow.source,
            flow_dst: flow.destination,
            hop_index: hop.hop_index,
            w_after: w,
            g_after: g,
        });
    }
    Warmup { states, events }
}

const EVENT_COLUMNS: [&str; 7] = [
    "slot",
    "transmitter",
    "flow_src",
    "flow_dst",
    "hop_index",
    "w_after",
    "g_after",
];

pub fn write_event_log<W: Write>(out: W, events: &[TransmitEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENT_COLUMNS)?;
    for e in events {
        w.write_record([
            e.slot.to_string(),
            e.transmitter.to_string(),
            e.flow_src.to_string(),
            e.flow_dst.to_string(),
            e.hop_index.to_string(),
            e.w_after.to_string(),
            e.g_after.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_event_log<R: Read>(input: R, origin: &Path) -> Result<Vec<TransmitEvent>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != EVENT_COLUMNS {
        return Err(Error::parse(
            origin,
            format!("expected header {}", EVENT_COLUMNS.join(",")),
        ));
    }
    let mut events = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |i: usize| Error::parse(origin, format!("row {row}: bad `{}`", EVENT_COLUMNS[i]));
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        events.push(TransmitEvent {
            slot: int(0)?,
            transmitter: NodeId(int(1)? as usize),
            flow_src: NodeId(int(2)? as usize),
            flow_dst: NodeId(int(3)? as usize),
            hop_index: int(4)? as usize,
            w_after: field(5).parse().map_err(|_| bad(5))?,
            g_after: int(6)?,
        });
    }
    Ok(events)
}
