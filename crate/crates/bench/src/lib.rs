//! Benchmark harness and command-line tool for the ESG storage engines.

pub mod cli;
pub mod harness;
pub mod matrix;
pub mod report;

pub use cli::{cli_main, run_cli};
