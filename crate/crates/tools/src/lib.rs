//! Experiment configs, file formats and the job runner behind the `ducc`
//! command.

pub mod config;
pub mod formats;
pub mod presets;
pub mod runner;
pub mod selftest;
