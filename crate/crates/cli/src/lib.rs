//! Experiment runner for the inspection environment: seed sweeps, run
//! directories, evaluation, traces and aggregate reports.

pub mod artifact;
pub mod cli;
pub mod commands;
pub mod spec;
