//! Scenario runner for the `beables-core` models: reads a TOML scenario,
//! evaluates it, writes field grids (CSV or JSON), photon ray polylines and
//! a JSON report whose checks are recomputed from the files just written.
//!
//! Exit codes: 0 success, 2 invalid input, 3 impossible post-selection,
//! 4 failed invariant check, 5 I/O failure.

pub mod config;
pub mod emit;
pub mod error;
pub mod report;
pub mod run;

pub use error::{Result, RunError};
