//! First passage percolation on scale-free spatial random graphs.
//!
//! The crate generates geometric inhomogeneous random graphs (GIRG, threshold
//! GIRG and their blown-up / Poisson-extended versions), scale-free
//! percolation on `Z^d` and hyperbolic random graphs, assigns i.i.d. edge
//! lengths, and measures weighted distances on them. Around that core sit the
//! explosion criterion for edge-length laws, weight-dependent percolation,
//! the doubly-exponential boxing system, a Bernoulli branching random walk
//! that dominates neighbourhood growth, and a Monte Carlo harness.
//!
//! Randomness is counter based: every per-vertex and per-pair draw is keyed
//! by `(seed, purpose, entity)`, so coupled models that share a seed agree on
//! the shared entities and results do not depend on thread scheduling.

pub mod boxing;
pub mod brw;
pub mod dist;
pub mod error;
pub mod fpp;
pub mod genmodel;
pub mod harness;
pub mod length;
pub mod perc;
pub mod rng;
pub mod spatial;

pub use error::{Error, Result};
pub use length::Length;
