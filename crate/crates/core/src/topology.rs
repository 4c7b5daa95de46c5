//! Random geometric node placement and omnidirectional neighbourhoods.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};

/// Dense node index, `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing of `other` seen from `self`, in `[0, 2pi)`.
    #[inline]
    pub fn bearing_to(&self, other: &Point) -> f64 {
        normalize_angle((other.y - self.y).atan2(other.x - self.x))
    }
}

/// Maps any finite angle onto `[0, 2pi)`.
pub fn normalize_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = a.rem_euclid(tau);
    // rem_euclid can round up to exactly tau for tiny negative inputs
    if r >= tau {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Point>,
    width: f64,
    height: f64,
    range: f64,
    seed: u64,
}

impl Topology {
    /// Builds a topology from explicit positions. Every point must lie in the
    /// region and there must be at least two of them.
    pub fn new(positions: Vec<Point>, width: f64, height: f64, range: f64, seed: u64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InvalidTopology(format!(
                "need at least 2 nodes, got {}",
                positions.len()
            )));
        }
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidTopology(format!("region {width} x {height}")));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::InvalidTopology(format!("omni range {range}")));
        }
        if let Some((i, p)) = positions
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=width).contains(&p.x) || !(0.0..=height).contains(&p.y))
        {
            return Err(Error::InvalidTopology(format!(
                "node {i} at ({}, {}) outside region",
                p.x, p.y
            )));
        }
        Ok(Topology {
            positions,
            width,
            height,
            range,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, v: NodeId) -> Point {
        self.positions[v.0]
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// Omnidirectional transmission range `r`.
    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_range(mut self, range: f64) -> Result<Self> {
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::InvalidTopology(format!("omni range {range}")));
        }
        self.range = range;
        Ok(self)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.positions.len()).map(NodeId)
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.positions[a.0].distance(&self.positions[b.0])
    }

    /// All `u != v` within the closed omni disc of radius `r` around `v`,
    /// ascending by id.
    pub fn omni_neighbors(&self, v: NodeId) -> Vec<NodeId> {
        let pv = self.positions[v.0];
        self.nodes()
            .filter(|&u| u != v && pv.distance(&self.positions[u.0]) <= self.range)
            .collect()
    }

    pub fn omni_degree(&self, v: NodeId) -> usize {
        self.omni_neighbors(v).len()
    }

    pub fn mean_omni_degree(&self) -> f64 {
        let total: usize = self.nodes().map(|v| self.omni_degree(v)).sum();
        total as f64 / self.len() as f64
    }

    /// Maximum pairwise Euclidean distance `D`.
    pub fn euclidean_diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                d = d.max(a.distance(b));
            }
        }
        d
    }

    /// Whether the all-omni disc graph is connected.
    pub fn is_omni_connected(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for u in self.omni_neighbors(NodeId(v)) {
                if !seen[u.0] {
                    seen[u.0] = true;
                    count += 1;
                    queue.push_back(u.0);
                }
            }
        }
        count == n
    }

    /// Writes `node_id,x,y` to `path` and the `key=value` sidecar next to it.
    /// Coordinates carry 17 significant digits so a reload is bit-exact.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node_id", "x", "y"])?;
        for (i, p) in self.positions.iter().enumerate() {
            w.write_record([i.to_string(), format!("{:.16e}", p.x), format!("{:.16e}", p.y)])?;
        }
        w.flush()?;
        let meta = format!(
            "width={}\nheight={}\nr={}\nseed={}\n",
            self.width, self.height, self.range, self.seed
        );
        fs::write(meta_path(path), meta)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let meta_file = meta_path(path);
        let meta = fs::read_to_string(&meta_file)?;
        let (mut width, mut height, mut range, mut seed) = (None, None, None, None);
        for line in meta.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(&meta_file, format!("bad line `{line}`")))?;
            let bad = || Error::parse(&meta_file, format!("bad value for `{k}`"));
            match k.trim() {
                "width" => width = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
                "height" => height = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
                "r" => range = Some(v.trim().parse::<f64>().map_err(|_| bad())?),
                "seed" => seed = Some(v.trim().parse::<u64>().map_err(|_| bad())?),
                other => return Err(Error::parse(&meta_file, format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::parse(&meta_file, format!("missing `{k}`"));
        let width = width.ok_or_else(|| missing("width"))?;
        let height = height.ok_or_else(|| missing("height"))?;
        let range = range.ok_or_else(|| missing("r"))?;
        let seed = seed.ok_or_else(|| missing("seed"))?;

        let mut rdr = csv::Reader::from_path(path)?;
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["node_id", "x", "y"] {
            return Err(Error::parse(path, "expected header node_id,x,y"));
        }
        let mut positions = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let id: usize = field(0)
                .parse()
                .map_err(|_| Error::parse(path, format!("row {row}: bad node_id")))?;
            if id != row {
                return Err(Error::parse(
                    path,
                    format!("row {row}: node ids must be dense, got {id}"),
                ));
            }
            let x: f64 = field(1)
                .parse()
                .map_err(|_| Error::parse(path, format!("row {row}: bad x")))?;
            let y: f64 = field(2)
                .parse()
                .map_err(|_| Error::parse(path, format!("row {row}: bad y")))?;
            positions.push(Point::new(x, y));
        }
        Topology::new(positions, width, height, range, seed)
    }
}

pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Uniform i.i.d. placement of `n_nodes` in `[0, width] x [0, height]` with
/// omni range 1.
pub fn generate_topology(n_nodes: usize, width: f64, height: f64, seed: u64) -> Result<Topology> {
    if n_nodes < 2 {
        return Err(Error::InvalidTopology(format!("need at least 2 nodes, got {n_nodes}")));
    }
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(Error::InvalidTopology(format!("region {width} x {height}")));
    }
    let mut rng = rng_for(seed, stream::TOPOLOGY);
    let positions = (0..n_nodes)
        .map(|_| Point::new(rng.gen::<f64>() * width, rng.gen::<f64>() * height))
        .collect();
    Topology::new(positions, width, height, 1.0, seed)
}

/// Draws topologies starting at `seed`, incrementing it until the omni graph
/// is connected. Gives up after `max_attempts`.
pub fn generate_connected_topology(
    n_nodes: usize,
    width: f64,
    height: f64,
    seed: u64,
    max_attempts: usize,
) -> Result<Topology> {
    let mut s = seed;
    for _ in 0..max_attempts {
        let topo = generate_topology(n_nodes, width, height, s)?;
        if topo.is_omni_connected() {
            return Ok(topo);
        }
        log::warn!("topology n={n_nodes} {width}x{height} seed={s} disconnected, resampling");
        s = s.wrapping_add(1);
    }
    Err(Error::InvalidTopology(format!(
        "no connected topology for n={n_nodes} {width}x{height} in {max_attempts} attempts from seed {seed}"
    )))
}
