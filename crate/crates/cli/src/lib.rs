//! Command-line driver: JSON config in, CSV/JSON/PGM files out.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{load_config, RunConfig};
pub use error::CliError;
pub use run::{execute, Cli};
