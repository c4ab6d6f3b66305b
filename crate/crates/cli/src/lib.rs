//! Experiment commands behind the `qwgan` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;
