//! A laboratory for studying inference of 3D shape attributes from rendered
//! images: procedural stimulus synthesis, software rendering, a small
//! multi-task attribute + embedding model, and the probing protocols that
//! characterize what such a model learns.

pub mod cluster;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod math;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod render;
pub mod saliency;

pub mod cli;

pub use error::{Error, Result};
