//! Batch experiment runner for the discrete-mechanics library: scenario
//! configuration, trajectory generation with reference integrators, invariant
//! check suites and CSV emission.

pub mod commands;
pub mod config;
pub mod csvout;
pub mod pipeline;
