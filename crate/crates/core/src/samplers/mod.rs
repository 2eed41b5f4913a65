//! Markov chains and couplings for spins and random-cluster configurations.
//!
//! All samplers act on the working graph of a [`FieldGraph`](crate::graph::FieldGraph):
//! the field is a set of edges to the root, the root spin is pinned to `+1`, and the
//! root is the open hub of the random-cluster model.

mod color;
mod fkchain;
mod snapshot;
mod spin;

pub use color::{color_red_white, pire_sample, Environment, RedWhite};
pub use fkchain::{
    couplings, es_fk_from_spins, es_spins_from_fk, fk_heatbath_coupled, CoupledFk, FkHeatBath, SwendsenWang,
};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use spin::{glauber_run, wolff_run, Glauber, Wolff};

/// Burn-in sweeps used by the samplers unless a caller asks otherwise.
pub const DEFAULT_BURN_IN: usize = 1000;
