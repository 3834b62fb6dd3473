//! Config-driven scenario runner around the `entroflux` library.
//!
//! A scenario file (TOML) declares one of four run kinds, a model, an initial
//! state, and a time grid. `run_scenario` sweeps the grid, writes a CSV time
//! series, and evaluates a fixed set of identity checks for that kind; the
//! binary maps the outcome to exit codes (0 pass, 1 identity failure,
//! 2 config error, 3 numerical error).

pub mod config;
pub mod report;
pub mod runner;

pub use config::{load_config, CliOverrides, ConfigErrors, Kind, ScenarioConfig};
pub use report::{render_csv, render_text, write_csv, write_text};
pub use runner::{run_scenario, IdentityCheck, RunError, RunReport};

/// Directory holding the scenario files shipped with the crate.
pub fn bundled_scenario_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}
