//! Command-line front end for the hysteretic beam library: TOML run
//! configurations, shipped presets and the `modes`, `simulate`, `converge`,
//! `rom build` and `rom eval` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;

pub use commands::Context;
pub use config::RunConfig;
pub use error::{CliError, Result};
