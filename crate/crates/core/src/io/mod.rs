//! Configuration files, profile CSVs, JSON reports and plots.

pub mod config;
pub mod output;
pub mod svg;

pub use config::{load_config, parse_config, render_config, save_config, ConfigError, Format, RunConfig};
pub use output::{barrier_csv, eigen_csv, render_csv, solution_csv, write_json, write_text, OutputError, SolveJson};
