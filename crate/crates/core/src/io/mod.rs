//! Command-line entry point, configuration parsing, CSV/VTK emission and run
//! manifests.

pub mod cli;
pub mod config;
pub mod output;

pub use cli::cli_main;
pub use config::{emit_config, parse_config_file, parse_config_str, ConfigError};
pub use output::{write_convergence_csv, write_load_csv, write_mesh_vtk, write_vtk, RunManifest};
