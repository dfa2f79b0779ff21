//! Topology-guided hyperdimensional classifier for binarised glyph images.

pub mod corruptions;
pub mod dataset;
pub mod error;
pub mod hv;
pub mod image;
pub mod moments;
pub mod pipeline;
pub mod topology;

pub use error::{Error, Result};
pub use hv::{Hypervector, PrototypeBank};
pub use image::{BinaryMask, GrayImage, Point};
pub use pipeline::{RunConfig, RunReport, TrainedModel};
