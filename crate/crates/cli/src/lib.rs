//! Command-line front end for `infogeo`: reads environment and configuration
//! files, runs planners and simulations, and writes canonical JSON, CSV and
//! SVG artifacts with a manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod commands;
pub mod error;
pub mod json;
pub mod manifest;
pub mod render;
pub mod schema;

pub use error::{CliError, CliResult};
