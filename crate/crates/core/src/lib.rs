//! Diver re-identification by feature clustering.
//!
//! Each detected diver crop is summarized by an 18-dimensional vector
//! (quadrant LAB means, mean spectral amplitudes, edge and hull centroids,
//! Hu moments). K-Means over all vectors of a session groups detections of
//! the same diver, and clusters are named in order of first appearance.
//!
//! The numeric kernels ([`features::frequency::dft2d`], [`geometry`],
//! [`features::shape::hull`], [`features::shape::rdp`],
//! [`features::shape::moments`], [`clustering`]) are generic over
//! [`Scalar`]; the aliases below fix them to `f64`, which is what the
//! pipeline uses.

pub mod clustering;
pub mod config;
pub mod error;
pub mod features;
pub mod geometry;
pub mod imaging;
pub mod pipeline;
pub mod scalar;

pub use error::{Error, Result};
pub use imaging::{BoundingBox, ColorSpace, ImageBuffer};
pub use scalar::Scalar;

pub type Point = geometry::Point2<f64>;
pub type Polyline = geometry::Contour<f64>;
pub type Moments = features::shape::ImageMoments<f64>;
pub type ClusterModel = clustering::ClusterModel<f64>;
pub type KMeansParams = clustering::KMeansParams<f64>;
pub type RealMatrix = features::frequency::Matrix<f64>;
pub type Spectrum = features::frequency::Matrix<num_complex::Complex<f64>>;

pub use clustering::{FeatureVector, IdentityMap, FEATURE_DIMS};
