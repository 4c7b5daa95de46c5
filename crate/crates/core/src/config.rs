//! Experiment configuration files.
//!
//! One `key = value` per line, `#` starts a comment, lists are
//! comma-separated. Regions are written `WxH`. Unset keys take the defaults
//! of the chosen study (see [`ExperimentConfig::defaults`]).
//!
//! | key | meaning |
//! |---|---|
//! | `study` | `rand_p`, `diameter` or `wfb` (required) |
//! | `n_nodes` | fixed node count; otherwise `round(density * W * H)` |
//! | `density` | nodes per unit area |
//! | `regions` | list of `WxH` |
//! | `p_values` | beamformer fractions (`rand_p`, `diameter`) |
//! | `model` | `sector` or `ula` |
//! | `alpha` | ULA path-loss exponent |
//! | `ula_calibrated` | `true`: ULA peak reach equals the sector beam length |
//! | `ula_elements` | force the ULA element count |
//! | `beta` | list of similarity constants (`wfb`) |
//! | `source_fraction` | share of nodes that originate a flow (`wfb`) |
//! | `theta_grid` | candidate beam widths in radians |
//! | `replicates` | replicates per sweep point |
//! | `seed` | base seed |
//! | `range` | omni range `r` |

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::antenna::{default_theta_grid, DEFAULT_PATH_LOSS_EXPONENT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    RandP,
    Diameter,
    Wfb,
}

impl FromStr for Study {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rand_p" | "rand_p_sweep" => Ok(Study::RandP),
            "diameter" | "diameter_sweep" => Ok(Study::Diameter),
            "wfb" | "wfb_sweep" => Ok(Study::Wfb),
            other => Err(Error::Config(format!("unknown study `{other}`"))),
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Study::RandP => "rand_p_sweep",
            Study::Diameter => "diameter_sweep",
            Study::Wfb => "wfb_sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntennaModel {
    Sector,
    Ula,
}

impl FromStr for AntennaModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sector" => Ok(AntennaModel::Sector),
            "ula" => Ok(AntennaModel::Ula),
            other => Err(Error::Config(format!("unknown antenna model `{other}`"))),
        }
    }
}

impl fmt::Display for AntennaModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AntennaModel::Sector => "sector",
            AntennaModel::Ula => "ula",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub width: f64,
    pub height: f64,
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Config(format!("region `{s}` is not WxH")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x > 0.0 && x.is_finite())
                .ok_or_else(|| Error::Config(format!("bad region `{s}`")))
        };
        Ok(Region {
            width: parse(w)?,
            height: parse(h)?,
        })
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Density of 300 nodes in a 10 x 10 region.
pub const REFERENCE_DENSITY: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub study: Study,
    pub n_nodes: Option<usize>,
    pub density: f64,
    pub regions: Vec<Region>,
    pub p_values: Vec<f64>,
    pub model: AntennaModel,
    pub alpha: f64,
    pub ula_calibrated: bool,
    pub ula_elements: Option<u32>,
    pub betas: Vec<f64>,
    pub source_fraction: f64,
    pub theta_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub range: f64,
}

impl ExperimentConfig {
    pub fn defaults(study: Study) -> Self {
        let square = |s: f64| Region { width: s, height: s };
        let (n_nodes, regions, p_values) = match study {
            Study::RandP => (
                Some(300),
                vec![square(10.0)],
                (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            ),
            Study::Diameter => (
                None,
                [6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0].map(square).to_vec(),
                vec![0.0, 1.0],
            ),
            Study::Wfb => (None, [8.0, 10.0, 11.0, 12.0].map(square).to_vec(), vec![]),
        };
        ExperimentConfig {
            study,
            n_nodes,
            density: REFERENCE_DENSITY,
            regions,
            p_values,
            model: AntennaModel::Sector,
            alpha: DEFAULT_PATH_LOSS_EXPONENT,
            ula_calibrated: true,
            ula_elements: None,
            betas: vec![0.2],
            source_fraction: 0.5,
            theta_grid: default_theta_grid(8),
            replicates: 20,
            seed: 1,
            range: 1.0,
        }
    }

    pub fn nodes_for(&self, region: &Region) -> usize {
        self.n_nodes
            .unwrap_or_else(|| (self.density * region.width * region.height).round() as usize)
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.regions.is_empty() {
            return fail("regions must not be empty".into());
        }
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        if self.theta_grid.is_empty()
            || self
                .theta_grid
                .iter()
                .any(|t| !(*t > 0.0 && *t <= std::f64::consts::TAU))
        {
            return fail("theta_grid must be non-empty with values in (0, 2pi]".into());
        }
        if !(self.range > 0.0) {
            return fail(format!("range {} must be positive", self.range));
        }
        if !(self.alpha > 0.0) {
            return fail(format!("alpha {} must be positive", self.alpha));
        }
        match self.study {
            Study::RandP | Study::Diameter => {
                if self.p_values.is_empty() {
                    return fail("p_values must not be empty".into());
                }
                if self.p_values.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return fail("p_values must lie in [0, 1]".into());
                }
            }
            Study::Wfb => {
                if self.betas.is_empty() || self.betas.iter().any(|b| !(*b >= 0.0)) {
                    return fail("beta must be a non-empty list of non-negative values".into());
                }
                if !(self.source_fraction > 0.0 && self.source_fraction <= 1.0) {
                    return fail(format!("source_fraction {} outside (0, 1]", self.source_fraction));
                }
            }
        }
        if self.study == Study::Diameter && self.regions.len() < 3 {
            return fail("diameter sweep needs at least 3 regions".into());
        }
        if let Some(n) = self.n_nodes {
            if n < 2 {
                return fail("n_nodes must be at least 2".into());
            }
        } else if !(self.density > 0.0) {
            return fail("density must be positive".into());
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let study: Study = pairs
            .iter()
            .find(|(k, _)| k == "study")
            .ok_or_else(|| Error::Config("missing `study`".into()))?
            .1
            .parse()?;
        let mut cfg = ExperimentConfig::defaults(study);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| num(key, s))
                .collect()
        }
        match key {
            "study" => self.study = value.parse()?,
            "n_nodes" => self.n_nodes = Some(num(key, value)?),
            "density" => {
                self.density = num(key, value)?;
                self.n_nodes = None;
            }
            "regions" => {
                self.regions = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse())
                    .collect::<Result<_>>()?
            }
            "p_values" => self.p_values = list(key, value)?,
            "model" => self.model = value.parse()?,
            "alpha" => self.alpha = num(key, value)?,
            "ula_calibrated" => self.ula_calibrated = num(key, value)?,
            "ula_elements" => self.ula_elements = Some(num(key, value)?),
            "beta" => self.betas = list(key, value)?,
            "source_fraction" => self.source_fraction = num(key, value)?,
            "theta_grid" => self.theta_grid = list(key, value)?,
            "replicates" => self.replicates = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "range" => self.range = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}
