//! Verification harness: theorem checklist, operator cache and reports.

pub mod cache;
pub mod checks;
pub mod config;
pub mod report;

pub use checks::{Bench, CheckId, FieldKind, Grid, Params, RunOptions};
pub use report::{CheckOutcome, Report, Verdict};
