//! Configuration loading and output rendering for the `pinch` binary.
//!
//! The binary itself lives in `main.rs`; this library holds the pieces with
//! testable surface area: the TOML configuration schema with its defaults
//! ([`config`]) and the stable CSV/JSON renderers ([`output`]).

pub mod config;
pub mod output;

pub use config::{parse_config, ConfigError, OutputFormat, ResolvedConfig, RunConfig};
pub use output::{
    render_place_csv, render_place_json, render_sweep_csv, render_sweep_json, render_thresholds,
    render_trial_dump, RateUnit,
};
