//! File formats, reports and the command line around `xfer-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod lock;
pub mod model_io;
pub mod report;

pub use error::{Error, Result};
