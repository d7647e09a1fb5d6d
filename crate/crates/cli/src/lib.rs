//! Library surface of the command-line front end, exposed so integration
//! tests can drive the same dispatch path as the binary.

// `!(x > 0)` is the NaN-rejecting form used by the config validators
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

pub use commands::{dispatch, report_verdicts, CommandKind};
pub use config::RunConfig;
