//! File formats, bank directories, parallel expansion and the `pcx`
//! command-line tool, built on [`pcx_core`].

pub mod bank;
pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod pipeline;

pub use error::{Error, Location, Result};
