//! Scenario files, run reports and the `geoswarm` command-line tool.

// `!(x <= tol)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;
pub mod table;
pub mod validate;

pub use error::{CliError, Result};
