//! Command-line front end: file formats, commands and the benchmark harness.

pub mod bench;
pub mod commands;
pub mod format;

pub use commands::{run_args, EXIT_INPUT, EXIT_OK, EXIT_SOLVER};
