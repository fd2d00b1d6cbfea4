//! Batch front-end for the switching QVI solver suite: config parsing and
//! stage orchestration. The `qvi` binary is a thin shell around this.

pub mod config;
pub mod runner;
