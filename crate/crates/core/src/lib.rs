//! Random walks in random environment on the line and on trees, the
//! continuum objects they converge to, and numerical tools for comparing
//! the two.
//!
//! Module map:
//!
//! - [`env1d`]: one-dimensional environments, flattening, potentials,
//!   resistance metric and invariant measure, barrier environments.
//! - [`treecore`]: plane trees, size-conditioned Galton–Watson sampling,
//!   contour coding and branching random walk embeddings.
//! - [`rwre_tree`]: conductance networks on planted trees, resistance
//!   metric, invariant measure, discrete and continuous-time walks.
//! - [`errw`]: edge-reinforced random walk on trees and its random
//!   environment (mixture) representation.
//! - [`continuum`]: coded real trees, stick-breaking, tree-indexed Gaussian
//!   fields, distorted metrics, continuum potentials and Brox diffusion.
//! - [`harness`]: finite metric measure spaces, correspondences, couplings,
//!   distance bounds and the line-scaling experiment.
//! - [`chain`]: birth–death chains on a one-dimensional grid, simulated or
//!   solved for their law.
//! - [`stats`]: goodness-of-fit statistics used by tests and experiments.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod continuum;
pub mod env1d;
pub mod errw;
pub mod error;
pub mod harness;
pub mod rng;
pub mod rwre_tree;
pub mod stats;
pub mod treecore;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
