//! Per-detection descriptors that make up the 18-dimensional feature vector.

pub mod color;
pub mod frequency;
pub mod shape;

pub use color::{quadrant_color_means, ColorDescriptor};
pub use frequency::{average_amplitude, dft2d, SpectrumDescriptor, SpectrumOptions};
pub use shape::{
    edge_centroid, hu_moments, hull_centroid, CentroidMode, EdgeDescriptor, HullDescriptor,
    MomentDescriptor,
};
