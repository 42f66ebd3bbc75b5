//! Front end for `grating-core`: configuration files, parameter sweeps,
//! bound tables, verification suites and CSV output.

pub mod config;
pub mod report;
pub mod run;
pub mod verify;
