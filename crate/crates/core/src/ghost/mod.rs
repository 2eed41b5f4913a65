//! Two-ghost inequality for percolation in random environment.

mod estimate;
mod explore;

pub use estimate::{ghost_scan, s_lambda_estimate, two_ghost_estimate, EnvModel, EnvSampler, GhostRow, GhostScan, GHOST_CSV_HEADER};
pub use explore::{explore_cluster, fluctuation, sample_ghost, ExplorationStep, ExplorationTrace, GreenSet};
