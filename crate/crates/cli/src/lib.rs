pub mod commands;
pub mod curve_io;

pub use commands::{exit_code, run, Cli, Outcome};
