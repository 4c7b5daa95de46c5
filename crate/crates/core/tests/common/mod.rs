//! Reference evaluators shared by the integration suites. They work on
//! dense matrices and plain loops so they share no code paths with the
//! library beyond its public types.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swbeam::linkgraph::DirectedLinkGraph;
use swbeam::topology::{Point, Topology};
use swbeam::wfb::{TransmitEvent, WfbNodeState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_digraph(rng: &mut impl Rng, n: usize, density: f64) -> DirectedLinkGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen::<f64>() < density {
                edges.push((a, b));
            }
        }
    }
    DirectedLinkGraph::from_edges(n, edges).unwrap()
}

pub fn adjacency(graph: &DirectedLinkGraph) -> Vec<Vec<bool>> {
    let n = graph.len();
    let mut adj = vec![vec![false; n]; n];
    for (a, b) in graph.edges() {
        adj[a][b] = true;
    }
    adj
}

/// Floyd-Warshall hop distances; `None` for unreachable.
pub fn floyd_warshall(adj: &[Vec<bool>]) -> Vec<Vec<Option<u64>>> {
    let n = adj.len();
    let mut d: Vec<Vec<Option<u64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Some(0)
                    } else if adj[i][j] {
                        Some(1)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

pub struct BruteMetrics {
    pub apl: Option<f64>,
    pub clustering: f64,
    pub unidirectional: f64,
    pub unreachable: f64,
}

pub fn brute_metrics(graph: &DirectedLinkGraph) -> BruteMetrics {
    let adj = adjacency(graph);
    let n = adj.len();
    let d = floyd_warshall(&adj);
    let (mut total, mut pairs) = (0u64, 0u64);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                if let Some(h) = d[i][j] {
                    total += h;
                    pairs += 1;
                }
            }
        }
    }
    let ordered = (n * (n - 1)) as u64;

    let mut local_sum = 0.0;
    for v in 0..n {
        let outs: Vec<usize> = (0..n).filter(|&u| adj[v][u]).collect();
        let k = outs.len();
        let c = if k < 2 {
            0.0
        } else {
            let mut links = 0usize;
            for &a in &outs {
                for &b in &outs {
                    if a != b && adj[a][b] {
                        links += 1;
                    }
                }
            }
            links as f64 / (k * (k - 1)) as f64
        };
        local_sum += c;
    }

    let mut one_way = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if d[i][j].is_some() != d[j][i].is_some() {
                one_way += 1;
            }
        }
    }

    BruteMetrics {
        apl: (pairs > 0).then(|| total as f64 / pairs as f64),
        clustering: local_sum / n as f64,
        unidirectional: one_way as f64 / (n * (n - 1) / 2) as f64,
        unreachable: (ordered - pairs) as f64 / ordered as f64,
    }
}

/// Weighted beam length written out directly from the band geometry.
pub fn weighted_length(theta: f64, r: f64, n: f64) -> f64 {
    let length = r * (2.0 * PI / theta).sqrt();
    let first = theta * r * r / 2.0;
    let depth_start = if length > r { length - r } else { 0.0 };
    let last = theta * (length * length - depth_start * depth_start) / 2.0;
    let disc = PI * r * r;
    let occupancy = |area: f64| {
        let frac = if area >= disc { 1.0 } else { area / disc };
        1.0 - (1.0 - frac).powf(n)
    };
    length * occupancy(first) * occupancy(last)
}

/// Exhaustive argmax; equal scores keep the narrower width.
pub fn grid_argmax(grid: &[f64], r: f64, n: f64) -> f64 {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = sorted[0];
    let mut best_score = weighted_length(best, r, n);
    for &t in &sorted[1..] {
        let s = weighted_length(t, r, n);
        if s > best_score {
            best = t;
            best_score = s;
        }
    }
    best
}

pub fn small_topology(rng: &mut impl Rng, n: usize, side: f64, seed: u64) -> Topology {
    let pts = (0..n)
        .map(|_| Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect();
    Topology::new(pts, side, side, 1.0, seed).unwrap()
}

/// Dense re-execution of the transmit and overhear updates.
pub struct ReplayState {
    pub w: Vec<f64>,
    pub g: Vec<u64>,
    pub heard: Vec<Vec<bool>>,
    pub seen_w: Vec<Vec<f64>>,
    pub seen_g: Vec<Vec<u64>>,
    pub max_hop: Vec<Vec<u32>>,
}

#[derive(Debug)]
pub struct ReplayMismatch(pub String);

pub fn replay(topo: &Topology, events: &[TransmitEvent]) -> Result<ReplayState, ReplayMismatch> {
    let n = topo.len();
    let pos = topo.positions();
    let r = topo.range();
    let near = |a: usize, b: usize| {
        let (dx, dy) = (pos[a].x - pos[b].x, pos[a].y - pos[b].y);
        a != b && (dx * dx + dy * dy).sqrt() <= r
    };
    let mut s = ReplayState {
        w: vec![1.0; n],
        g: vec![1; n],
        heard: vec![vec![false; n]; n],
        seen_w: vec![vec![0.0; n]; n],
        seen_g: vec![vec![0; n]; n],
        max_hop: vec![vec![0; n]; n],
    };
    for (i, e) in events.iter().enumerate() {
        let v = e.transmitter.0;
        let mut sum = s.g[v] as f64 / s.w[v];
        for u in 0..n {
            if s.heard[v][u] {
                sum += s.seen_g[v][u] as f64 / s.seen_w[v][u];
            }
        }
        let g_new = s.g[v] + 1;
        let w_new = g_new as f64 / (s.w[v] * sum);
        if w_new.to_bits() != e.w_after.to_bits() || g_new != e.g_after {
            return Err(ReplayMismatch(format!(
                "event {i}: logged ({}, {}) recomputed ({w_new}, {g_new})",
                e.w_after, e.g_after
            )));
        }
        s.g[v] = g_new;
        s.w[v] = w_new;
        let hop = e.hop_index as u32 + 1;
        for u in 0..n {
            if !near(u, v) {
                continue;
            }
            let mut others = s.g[u] as f64 / s.w[u];
            for x in 0..n {
                if x != v && s.heard[u][x] {
                    others += s.seen_g[u][x] as f64 / s.seen_w[u][x];
                }
            }
            let bracket = g_new as f64 / w_new + others;
            s.w[u] = s.g[u] as f64 / (s.w[u] * bracket);
            s.heard[u][v] = true;
            s.seen_w[u][v] = w_new;
            s.seen_g[u][v] = g_new;
            s.max_hop[u][v] = s.max_hop[u][v].max(hop);
        }
    }
    Ok(s)
}

/// Bit-exact comparison of replayed and simulated final states.
pub fn compare_states(replayed: &ReplayState, states: &[WfbNodeState]) -> Result<(), ReplayMismatch> {
    for (v, st) in states.iter().enumerate() {
        if st.w.to_bits() != replayed.w[v].to_bits() || st.g != replayed.g[v] {
            return Err(ReplayMismatch(format!(
                "node {v}: simulated ({}, {}) replayed ({}, {})",
                st.w, st.g, replayed.w[v], replayed.g[v]
            )));
        }
        let heard: Vec<usize> = (0..states.len()).filter(|&u| replayed.heard[v][u]).collect();
        let table: Vec<usize> = st.neighbor_table.keys().map(|id| id.0).collect();
        if heard != table {
            return Err(ReplayMismatch(format!("node {v}: table {table:?} replayed {heard:?}")));
        }
        for (id, rec) in &st.neighbor_table {
            let u = id.0;
            if rec.w.to_bits() != replayed.seen_w[v][u].to_bits()
                || rec.g != replayed.seen_g[v][u]
                || rec.max_hop_count != replayed.max_hop[v][u]
            {
                return Err(ReplayMismatch(format!("node {v}: entry for {u} differs")));
            }
        }
    }
    Ok(())
}
