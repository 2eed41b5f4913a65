//! Spectral radius of graphs from return probabilities and of invariant processes
//! from covariance decay along a random walk.

mod process;
mod walk;

pub use process::{
    cluster_covariance_check, cluster_sizes, loop_gradient_comparison, process_cov_decay, schramm_check, torus_edge_at,
    BoundCheck, ClusterCovariance, CovSeries, LoopGradientComparison, ShiftRule, COV_CSV_HEADER,
};
pub use walk::{
    return_probability, rho_graph_estimate, rho_tree_estimate, tree_return_probabilities, RhoEstimate, WalkKernel,
    DENSE_WALK_LIMIT,
};
