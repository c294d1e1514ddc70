//! Experiment harness and command-line front end for `qroute`.

pub mod cli;
pub mod harness;
pub mod report;
