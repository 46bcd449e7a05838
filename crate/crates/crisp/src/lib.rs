//! Dataset IO, file formats and the command-line driver for `crisp-core`.

pub mod cli;
pub mod dataset;
pub mod debug;
pub mod error;
pub mod exec;
pub mod groundtruth;
pub mod logging;
pub mod mesh;
pub mod primitives;
pub mod report;

pub use error::{Error, Result};
