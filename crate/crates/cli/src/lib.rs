//! Command-line front end: argument parsing, dispatch to the experiment runners,
//! report/manifest writing and gnuplot templates.

pub mod args;
pub mod manifest;
pub mod plot;
pub mod run;

pub use args::{Cli, Command, Common};
pub use manifest::RunManifest;
pub use plot::{emit_plot_script, PlotKind};
pub use run::{execute, CliError, Outcome, EXIT_NUMERICAL, EXIT_PASS, EXIT_USAGE, EXIT_VERDICT};
