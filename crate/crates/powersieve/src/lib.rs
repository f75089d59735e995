//! Command-line workbench for `powersieve-core`: experiment configs, the
//! subcommand pipelines, the self-test suite and JSON/CSV reports.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;
pub mod selftest;
