//! Command-line front end for the star-network simulator: sweep
//! configuration, tabular output and figure presets.

pub mod config;
pub mod dataset;
pub mod error;
pub mod presets;
pub mod sweep;

pub use config::{DistanceGrid, Scenario, Settings, SourceParameter, SweepConfig};
pub use dataset::{emit, Cell, Dataset, OutputFormat};
pub use error::{CliError, CliResult};
pub use presets::reproduce;
pub use sweep::run_sweep;
