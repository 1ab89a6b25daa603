//! Configuration files, sweeps, plots and the command runner behind the `hstcn` binary.

pub mod app;
pub mod config_file;
pub mod plot;
pub mod report;
pub mod sweep;

pub use app::run;
pub use config_file::{parse_config, parse_document, to_config_text, ConfigDoc, ConfigError, Ties};
pub use sweep::{run_sweep, RunManifest, SweepParam, SweepRow, SweepSpec};
