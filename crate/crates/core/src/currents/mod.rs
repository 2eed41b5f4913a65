//! Random currents, the loop O(1) model and the mismatched double current.

mod dump;
mod magnitudes;
mod qpair;
mod worm;

pub use dump::CurrentDump;
pub use magnitudes::{
    loop_sprinkle_rate, lupu_werner_fk, lupu_werner_from_loops, magnitudes_from_parities, magnitudes_with,
    parity_magnitude, ExactCurrentSampler, ExactLoopSampler,
};
pub use qpair::{detect_event_a, gradient_bound_check, gradient_lhs, GradientBoundRow, sample_q, QPair, QParams, QSampler};
pub use worm::{worm_run, Worm};

use crate::error::Result;
use crate::exact::identities::{gradient_identity, Check};
use crate::graph::WeightedGraph;

/// Residual of the finite gradient identity for edge `e` of the subgraph `h_mask`
/// of `g` at zero field, with currents truncated at `nmax`.
pub fn finite_gradient_identity_check(g: &WeightedGraph, h_mask: u64, e: usize, beta: f64, nmax: Option<u32>) -> Result<Check> {
    gradient_identity(g, None, h_mask, e, beta, nmax)
}
