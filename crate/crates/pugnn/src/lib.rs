//! File formats, dataset manifests, the experiment harness and the pieces
//! of the `pugnn` command line that are worth testing on their own.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod manifest;
pub mod published;
pub mod trainlog;

pub use error::{Error, Result};

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "PUGNN_DATA_DIR";
