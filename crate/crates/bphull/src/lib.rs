//! Verification harness, file formats and command-line plumbing on top of
//! `bphull-core`.

pub mod error;
pub mod harness;
pub mod io;
pub mod report;
pub mod stats;

pub use error::{AppError, AppResult};
