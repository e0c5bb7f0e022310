//! Command-line front end, file formats and parallel drivers for
//! [`walkspec_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod export;
pub mod parallel;
pub mod sweep;
pub mod verify;
