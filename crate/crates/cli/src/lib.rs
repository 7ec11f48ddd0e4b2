//! Library side of the `cellflow` binary: configuration parsing, the
//! subcommands and plotting.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod render;

pub use commands::{CliError, PolicySource};
pub use config::{ConfigError, RunConfig};
