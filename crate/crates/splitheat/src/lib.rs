//! Experiment harness and command line tools for `splitheat-core`.
//!
//! [`harness`] produces sequential-error tables and timing comparisons,
//! [`output`] writes them as CSV, [`config`] reads `key = value` run files,
//! [`meshdump`] prints meshes and [`checks`] backs `splitheat verify`.

mod error;
pub use error::{Error, Result};

pub mod checks;
pub mod cli;
pub mod config;
pub mod harness;
pub mod meshdump;
pub mod output;
