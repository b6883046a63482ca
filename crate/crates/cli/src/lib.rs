//! Library half of the `mereo` binary: configuration schema, subcommand
//! implementations and the oracle checks shared with the acceptance suite.

pub mod checks;
pub mod commands;
pub mod config;
pub mod output;

mod error;

pub use error::CliError;

/// Version of the JSON config and output header layout.
pub const SCHEMA_VERSION: u32 = 1;

/// `git describe` of the build, or the crate version outside a checkout.
pub const BUILD_ID: &str = env!("MEREO_BUILD_ID");
