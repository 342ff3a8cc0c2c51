//! Library side of the `noma-isac` command-line tool: config-file parsing,
//! table formatting and the subcommand implementations. The binary in
//! `main.rs` only handles argument parsing and exit codes.

pub mod commands;
pub mod config_file;
pub mod table;

pub use commands::{
    cmd_ecr, cmd_outage, cmd_region, cmd_selftest, cmd_sensing, CommandOutput, SelftestReport,
    SweepSpec,
};
pub use config_file::{load_config, parse_config};
pub use table::{Format, Table};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Model(#[from] noma_isac::Error),

    #[error("{0}")]
    Usage(String),
}
