//! Simulation of wireless ad hoc networks that turn a few omnidirectional
//! nodes into long-range directional transmitters to obtain small-world
//! path lengths.
//!
//! * [`topology`]: random node placement and omni neighbourhoods
//! * [`antenna`]: sector and ULA beam geometry, optimal beam width
//! * [`linkgraph`]: directed links under directional transmit / omni receive
//! * [`metrics`]: path length, clustering, unidirectional pairs, growth fits
//! * [`wfb`]: traffic-driven centrality and the beamforming decision
//! * [`experiments`]: seeded sweeps reproducing the randomized, diameter and
//!   self-organization studies
//! * [`plotdata`]: two-column data files for plotting sweep results

pub mod antenna;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod linkgraph;
pub mod metrics;
pub mod plotdata;
pub mod seed;
pub mod topology;
pub mod wfb;

pub use error::{Error, Result};
