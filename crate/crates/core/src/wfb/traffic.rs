use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linkgraph::{omni_graph, DirectedLinkGraph};
use crate::metrics::UNREACHABLE;
use crate::seed::{rng_for, stream};
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    pub source: NodeId,
    pub destination: NodeId,
    /// Source first, destination last.
    pub route: Vec<NodeId>,
}

impl Flow {
    pub fn hops(&self) -> usize {
        self.route.len() - 1
    }
}

/// Minimum-hop route; among equally short routes the lexicographically
/// smallest node sequence.
pub fn min_hop_route(graph: &DirectedLinkGraph, src: NodeId, dst: NodeId) -> Option<Vec<NodeId>> {
    // hop distance *to* dst, via BFS on reversed edges
    let n = graph.len();
    let mut to_dst = vec![UNREACHABLE; n];
    to_dst[dst.0] = 0;
    let mut queue = std::collections::VecDeque::from([dst.0]);
    while let Some(v) = queue.pop_front() {
        for &u in graph.in_neighbors(v) {
            if to_dst[u] == UNREACHABLE {
                to_dst[u] = to_dst[v] + 1;
                queue.push_back(u);
            }
        }
    }
    if to_dst[src.0] == UNREACHABLE {
        return None;
    }
    let mut route = vec![src];
    let mut cur = src.0;
    while cur != dst.0 {
        // out lists are sorted, so the first qualifying neighbour is the smallest id
        cur = *graph
            .out_neighbors(cur)
            .iter()
            .find(|&&u| to_dst[u] == to_dst[cur] - 1)
            .expect("BFS layering guarantees a next hop");
        route.push(NodeId(cur));
    }
    Some(route)
}

/// `ceil(source_fraction * N)` distinct sources, each sending to a uniform
/// destination other than itself, routed on the all-omni graph.
pub fn generate_traffic(topo: &Topology, source_fraction: f64, seed: u64) -> Result<Vec<Flow>> {
    if !(source_fraction > 0.0 && source_fraction <= 1.0) {
        return Err(Error::InvalidTraffic(format!(
            "source fraction {source_fraction} outside (0, 1]"
        )));
    }
    let n = topo.len();
    let count = ((source_fraction * n as f64).ceil() as usize).min(n);
    let mut rng = rng_for(seed, stream::TRAFFIC);
    let sources = sample(&mut rng, n, count).into_vec();
    let graph = omni_graph(topo);
    let mut flows = Vec::with_capacity(count);
    for s in sources {
        let mut d = rng.gen_range(0..n - 1);
        if d >= s {
            d += 1;
        }
        match min_hop_route(&graph, NodeId(s), NodeId(d)) {
            Some(route) => flows.push(Flow {
                source: NodeId(s),
                destination: NodeId(d),
                route,
            }),
            None => log::warn!("flow {s} -> {d} dropped: destination unreachable"),
        }
    }
    Ok(flows)
}
