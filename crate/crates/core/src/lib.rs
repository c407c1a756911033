//! Critical inhomogeneous random bipartite graphs and their intersection graphs:
//! direct and LIFO-queue sampling, encoding processes, Poissonized surplus,
//! limit-process simulation and function-coded metric spaces.

pub mod encoding;
pub mod error;
pub mod graph;
pub mod harness;
pub mod lifo;
pub mod limit;
pub mod metric;
pub mod numeric;
pub mod poisson;
pub mod rng;
pub mod stats;
pub mod surplus;
pub mod weights;

pub use error::{ModelError, Result};
