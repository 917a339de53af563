//! A finite-box random-cluster (FK) percolation laboratory on the square
//! lattice: exact finite-volume measures under partially wired boundary
//! conditions, planar duality, heat-bath Monte Carlo, cluster and crossing
//! events, block renormalization, and rate-function experiments.

pub mod clusters;
pub mod duality;
pub mod error;
pub mod fk_core;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod renorm;
pub mod sampler;
pub mod stats;
pub mod union_find;

pub use error::{Error, Result};
pub use fk_core::Parameters;
