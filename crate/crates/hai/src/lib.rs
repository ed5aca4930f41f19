//! File formats, parallel drivers and the command line for `hai-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod graph_io;
pub mod parallel;
pub mod report;

pub use error::Failure;
