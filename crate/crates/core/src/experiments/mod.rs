//! Desk-scale experiments: magnetization scans, cluster tails, Hölder probes,
//! cluster-count smoothness and critical-point location.

mod betac;
mod holder;
mod kappa;
mod magnet;
mod table;
mod tail;

pub use betac::{
    betac_locate, betac_spread, binder_cumulant, strip_correlation_length, strip_crossing, strip_transfer_matrix,
    BetacModel, BetacReport,
};
pub use holder::{coarsen_beta, holder_probe, HolderFit};
pub use kappa::{free_energy_probe, KappaTable};
pub use magnet::{magnetization_onset, magnetization_scan, tree_magnetization, DecayRate, OnsetFit, MAGNETIZATION};
pub use table::{Family, ScanRow, ScanTable, SCAN_CSV_HEADER};
pub use tail::{cluster_tail, dyadic, fit_tail, oracle_tail, tree_tail_oracle, TailModel, TailTable};
