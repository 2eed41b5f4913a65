//! Graphical representations of the ferromagnetic Ising model on finite volumes.
//!
//! The crate bundles exact enumeration oracles (spins, random-cluster, loop O(1),
//! random currents), Monte Carlo samplers and couplings between the representations,
//! the two-ghost machinery for percolation in random environment, spectral-radius
//! estimators, and a reproducible experiment runner.

// `!(x >= 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod rng;
pub mod unionfind;
pub mod stats;
pub mod par;
pub mod graph;
pub mod model;
pub mod exact;
pub mod samplers;
pub mod currents;
pub mod ghost;
pub mod spectral;
pub mod experiments;
pub mod cli;

pub use error::{Error, Result};
