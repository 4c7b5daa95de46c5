//! Directed communication graph under directional-transmit /
//! omnidirectional-receive semantics: a node's antenna config shapes only its
//! own out-links.

use std::io::Write;
use std::path::Path;

use crate::antenna::AntennaConfig;
use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedLinkGraph {
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl DirectedLinkGraph {
    /// Builds a graph from an edge list. Self-loops and duplicates are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out_adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a >= n {
                return Err(Error::NodeOutOfRange(a, n));
            }
            if b >= n {
                return Err(Error::NodeOutOfRange(b, n));
            }
            if a != b {
                out_adj[a].push(b);
            }
        }
        for list in &mut out_adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_out_adjacency(out_adj))
    }

    fn from_out_adjacency(out_adj: Vec<Vec<usize>>) -> Self {
        let mut in_adj = vec![Vec::new(); out_adj.len()];
        for (a, outs) in out_adj.iter().enumerate() {
            for &b in outs {
                in_adj[b].push(a);
            }
        }
        DirectedLinkGraph { out_adj, in_adj }
    }

    pub fn len(&self) -> usize {
        self.out_adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out_adj.is_empty()
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.out_adj[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(a, outs)| outs.iter().map(move |&b| (a, b)))
    }

    /// True iff every edge has its reverse.
    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(a, b)| self.has_edge(b, a))
    }

    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst"])?;
        for (a, b) in self.edges() {
            w.write_record([a.to_string(), b.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        self.write_edge_list(std::fs::File::create(path)?)
    }

    /// Reads a `src,dst` edge list for a graph of `n` nodes.
    pub fn load_edge_list(path: &Path, n: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        if rdr.headers()?.iter().collect::<Vec<_>>() != ["src", "dst"] {
            return Err(Error::parse(path, "expected header src,dst"));
        }
        let mut edges = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<usize> {
                rec.get(i)
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| Error::parse(path, format!("row {row}: bad node id")))
            };
            edges.push((parse(0)?, parse(1)?));
        }
        Self::from_edges(n, edges)
    }
}

/// Edge `v -> u` exists iff `u` lies inside `v`'s transmit pattern.
pub fn build_link_graph(topo: &Topology, configs: &[AntennaConfig]) -> Result<DirectedLinkGraph> {
    if configs.len() != topo.len() {
        return Err(Error::ConfigLengthMismatch {
            configs: configs.len(),
            nodes: topo.len(),
        });
    }
    let pos = topo.positions();
    let out_adj = configs
        .iter()
        .enumerate()
        .map(|(v, cfg)| {
            (0..pos.len())
                .filter(|&u| u != v && cfg.covers(&pos[v], &pos[u]))
                .collect()
        })
        .collect();
    Ok(DirectedLinkGraph::from_out_adjacency(out_adj))
}

pub fn omni_configs(topo: &Topology) -> Vec<AntennaConfig> {
    vec![AntennaConfig::Omni { range: topo.range() }; topo.len()]
}

/// The all-omnidirectional disc graph.
pub fn omni_graph(topo: &Topology) -> DirectedLinkGraph {
    build_link_graph(topo, &omni_configs(topo)).expect("config count matches topology")
}

/// Out-neighbours of `v` under `cfg`, ascending.
pub fn covered_nodes(topo: &Topology, v: NodeId, cfg: &AntennaConfig) -> Vec<NodeId> {
    let pv = topo.position(v);
    topo.nodes()
        .filter(|&u| u != v && cfg.covers(&pv, &topo.position(u)))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::topology::{generate_topology, Point};

    #[test]
    fn omni_pair_is_bidirectional() {
        let t = Topology::new(vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0)], 1.0, 1.0, 1.0, 0).unwrap();
        let g = omni_graph(&t);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        assert!(g.is_symmetric());
    }

    #[test]
    fn narrow_beam_breaks_return_link() {
        // A at origin beams along +x; B sits at distance 0.8 along +y
        let t = Topology::new(vec![Point::new(0.0, 0.0), Point::new(0.0, 0.8)], 1.0, 1.0, 1.0, 0).unwrap();
        let mut cfgs = omni_configs(&t);
        cfgs[0] = AntennaConfig::sector(PI / 4.0, 2.0 * 2f64.sqrt(), 0.0).unwrap();
        let g = build_link_graph(&t, &cfgs).unwrap();
        assert!(g.has_edge(1, 0));
        assert!(!g.has_edge(0, 1));
        assert!(!g.is_symmetric());
    }

    #[test]
    fn length_mismatch_rejected() {
        let t = generate_topology(5, 2.0, 2.0, 1).unwrap();
        let cfgs = vec![AntennaConfig::Omni { range: 1.0 }; 4];
        assert!(matches!(
            build_link_graph(&t, &cfgs),
            Err(Error::ConfigLengthMismatch { configs: 4, nodes: 5 })
        ));
    }

    #[test]
    fn symmetry_examples() {
        assert!(DirectedLinkGraph::from_edges(0, []).unwrap().is_symmetric());
        assert!(DirectedLinkGraph::from_edges(3, []).unwrap().is_symmetric());
        assert!(!DirectedLinkGraph::from_edges(2, [(0, 1)]).unwrap().is_symmetric());
        assert!(DirectedLinkGraph::from_edges(2, [(0, 1), (1, 0)])
            .unwrap()
            .is_symmetric());
    }

    #[test]
    fn from_edges_normalizes() {
        let g = DirectedLinkGraph::from_edges(3, [(2, 0), (0, 2), (0, 1), (0, 2), (1, 1)]).unwrap();
        assert_eq!(g.out_neighbors(0), &[1, 2]);
        assert_eq!(g.in_neighbors(2), &[0]);
        assert_eq!(g.in_neighbors(0), &[2]);
        assert_eq!(g.edge_count(), 3);
        assert!(DirectedLinkGraph::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.csv");
        let g = DirectedLinkGraph::from_edges(4, [(0, 1), (1, 2), (3, 0)]).unwrap();
        g.save_edge_list(&path).unwrap();
        assert_eq!(DirectedLinkGraph::load_edge_list(&path, 4).unwrap(), g);
    }
}
