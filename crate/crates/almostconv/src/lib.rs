//! File formats, parallel curve computation and the command-line driver for
//! `almostconv-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod parallel;
pub mod report;
