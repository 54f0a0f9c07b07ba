//! Config parsing, CSV emission and the command-line sweep runner.

mod cli;
mod config;
mod csv;

pub use cli::{render_table, run_cli};
pub use config::{parse_config, render_config, ConfigError, SimConfig, CONFIG_KEYS};
pub use csv::{
    format_sig9, write_round_csv, write_summary_csv, OutputError, RunSummary, ROUND_CSV_HEADER,
    SUMMARY_CSV_HEADER,
};
