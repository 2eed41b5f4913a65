//! Configuration files, the experiment runner and reproducibility manifests.
//!
//! Exit codes used by the binary: 0 success, 2 configuration or input error,
//! 3 runtime invariant breach (including a failed `verify`), 4 I/O.

pub mod config;
mod manifest;
mod runner;
pub mod schema;

pub use config::Config;
pub use manifest::{run_config, verify, FileStatus, OutputRecord, RunManifest, RunReport, VerifyReport, MANIFEST_FILE, TOOL_VERSION};
pub use runner::{execute, RunOutput, SeedRecord};
pub use schema::{schema_text, validate, Validated, EXPERIMENTS, SCHEMA};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Invalid(_) | Error::SizeGuard(_) => EXIT_CONFIG,
        Error::Invariant { .. } => EXIT_INVARIANT,
        Error::Io(_) | Error::Json(_) => EXIT_IO,
    }
}
