//! Batch front end: configuration, property suites, and the `solve`,
//! `continue`, `verify` and `kernel-table` commands.

pub mod commands;
pub mod config;
pub mod output;
pub mod suites;
