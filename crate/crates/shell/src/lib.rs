//! Command line and HTTP front end over `gsign_core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod report;
pub mod server;
