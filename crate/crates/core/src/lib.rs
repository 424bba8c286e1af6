//! Percolation of noisy quantum networks.
//!
//! Builds classical topologies, assigns entangled-pair resources per link,
//! runs Monte Carlo bond percolation to measure diameter and giant-component
//! curves, and solves the self-consistency between affordable distance and
//! network diameter to find the quantum backbone and its hysteresis.

mod error;

pub mod analytics;
pub mod backbone;
pub mod experiment;
pub mod graph;
pub mod netgen;
pub mod percolation;
pub mod resources;
pub mod seed;

pub use error::{Error, Result};
