//! Core algorithms for turning temporal point maps of human-scene interaction
//! into a compact set of planar cuboid primitives, plus the metric suite used
//! to judge them.
//!
//! The crate is `no_std` (with `alloc`). IO, file formats and the CLI live in
//! the `crisp` crate.
#![no_std]

extern crate alloc;

pub mod association;
pub mod camera;
pub mod config;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod ingest;
pub mod math;
pub mod pipeline;
pub mod primitive_fit;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
