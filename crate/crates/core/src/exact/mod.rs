//! Exact enumeration oracles on small graphs.
//!
//! Every routine works on the working graph of a [`FieldGraph`]: the field is an
//! edge to the root, so spins, random-cluster configurations, currents and loops
//! are all functions of the working-graph edges. Sums are accumulated with
//! [`BlockSum`], which fixes the summation order and makes results bitwise
//! reproducible.

mod current;
mod fk;
pub mod identities;
mod loops;
mod spins;
pub mod suite;

pub use current::{
    brute_current_sum, class_sums, current_sum, double_tail_bound, even_odd_parts, ratio_bound, single_tail_bound,
    support_table, ClassVisit, SUPPORT_MAX_EDGES,
};
pub use fk::{rc_expectation, rc_probability, rc_sums, ClusterView};
pub use loops::{cycle_basis, loop_distribution, loop_distribution_on, loop_distribution_with, LoopDistribution};
pub use spins::{ising_expectation, spin_sums};

use crate::error::{Error, Result};

/// Largest number of binary degrees of freedom any enumeration accepts.
pub const MAX_ENUM_BITS: usize = 24;

/// Deterministic summation: sequential inside fixed-size blocks, pairwise across
/// blocks.
#[derive(Clone, Debug, Default)]
pub struct BlockSum {
    current: f64,
    filled: usize,
    // Pairwise merge stack: entry `i` holds the sum of `2^level` blocks.
    stack: Vec<(u32, f64)>,
}

impl BlockSum {
    pub const BLOCK: usize = 4096;

    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        self.current += x;
        self.filled += 1;
        if self.filled == Self::BLOCK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        let mut level = 0u32;
        let mut v = self.current;
        while let Some(&(l, s)) = self.stack.last() {
            if l != level {
                break;
            }
            self.stack.pop();
            v += s;
            level += 1;
        }
        self.stack.push((level, v));
        self.current = 0.0;
        self.filled = 0;
    }

    pub fn total(&self) -> f64 {
        let mut acc = self.current;
        for &(_, s) in self.stack.iter().rev() {
            acc += s;
        }
        acc
    }
}

pub(crate) fn guard_bits(what: &str, bits: usize) -> Result<()> {
    if bits > MAX_ENUM_BITS {
        return Err(Error::SizeGuard(format!(
            "{what}: 2^{bits} configurations exceed the enumeration limit 2^{MAX_ENUM_BITS}"
        )));
    }
    Ok(())
}
