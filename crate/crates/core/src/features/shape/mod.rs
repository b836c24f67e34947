//! Shape descriptors: the mean of simplified Canny edge contours, the mean of
//! convex hull vertices of thresholded contours, and Hu's seven moments.

pub mod canny;
pub mod contours;
pub mod hull;
pub mod moments;
pub mod rdp;

pub use canny::{canny_edges, detect_edges, CannyParams};
pub use contours::{trace_contours, TracedContour};
pub use hull::convex_hull;
pub use moments::{central_moments, ImageMoments};
pub use rdp::rdp_simplify;

use crate::error::{Error, Result};
use crate::geometry::{Contour, Point2};
use crate::imaging::{binarize, crop, BoundingBox, ColorSpace, ImageBuffer};

/// How point averages are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CentroidMode {
    /// Crop coordinates divided by the box width and height.
    #[default]
    Normalized,
    /// Frame pixel coordinates.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDescriptor {
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullDescriptor {
    pub centroid: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentDescriptor {
    pub hu: [f64; 7],
}

/// Stand-in for an empty point set: the box center.
fn sentinel(bbox: &BoundingBox, mode: CentroidMode) -> (f64, f64) {
    match mode {
        CentroidMode::Normalized => (0.5, 0.5),
        CentroidMode::Raw => (
            bbox.x_min as f64 + bbox.width() as f64 / 2.0,
            bbox.y_min as f64 + bbox.height() as f64 / 2.0,
        ),
    }
}

/// Unweighted mean of crop-relative points, expressed per `mode`.
fn point_mean<'a>(
    points: impl Iterator<Item = &'a Point2<f64>>,
    bbox: &BoundingBox,
    mode: CentroidMode,
) -> (f64, f64) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for p in points {
        sx += p.x;
        sy += p.y;
        n += 1;
    }
    if n == 0 {
        return sentinel(bbox, mode);
    }
    let (mx, my) = (sx / n as f64, sy / n as f64);
    match mode {
        CentroidMode::Normalized => (mx / bbox.width() as f64, my / bbox.height() as f64),
        CentroidMode::Raw => (mx + bbox.x_min as f64, my + bbox.y_min as f64),
    }
}

/// Mean of all points of the (already simplified) contours. Points are in
/// crop coordinates.
pub fn edge_centroid(contours: &[Contour<f64>], bbox: &BoundingBox, mode: CentroidMode) -> EdgeDescriptor {
    EdgeDescriptor {
        centroid: point_mean(contours.iter().flat_map(|c| c.points.iter()), bbox, mode),
    }
}

/// Simplified Canny contours of the grayscale crop, in crop coordinates.
pub fn edge_contours(
    gray: &ImageBuffer,
    bbox: &BoundingBox,
    canny: &CannyParams,
    epsilon: f64,
) -> Result<Vec<Contour<f64>>> {
    gray.expect_space(ColorSpace::Gray8)?;
    let edges = detect_edges(&crop(gray, bbox)?, canny)?;
    trace_contours(&edges)?
        .iter()
        .map(|t| rdp_simplify(&t.contour.cast::<f64>(), epsilon))
        .collect()
}

/// Hulls of every traced border of the thresholded crop, skipping borders
/// too small or too thin to have a proper hull.
pub fn crop_hulls(gray: &ImageBuffer, bbox: &BoundingBox, threshold: u8) -> Result<Vec<Contour<f64>>> {
    gray.expect_space(ColorSpace::Gray8)?;
    let mask = binarize(&crop(gray, bbox)?, threshold)?;
    let mut hulls = Vec::new();
    for traced in trace_contours(&mask)? {
        match convex_hull(&traced.contour.cast::<f64>().points) {
            Ok(h) => hulls.push(h),
            Err(Error::DegenerateHull) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(hulls)
}

pub fn hull_centroid(
    gray: &ImageBuffer,
    bbox: &BoundingBox,
    threshold: u8,
    mode: CentroidMode,
) -> Result<HullDescriptor> {
    let hulls = crop_hulls(gray, bbox, threshold)?;
    Ok(HullDescriptor {
        centroid: point_mean(hulls.iter().flat_map(|h| h.points.iter()), bbox, mode),
    })
}

/// Hu invariants of the intensity-weighted grayscale crop, without any log
/// transform.
pub fn hu_moments(gray: &ImageBuffer, bbox: &BoundingBox) -> Result<MomentDescriptor> {
    let m = central_moments::<f64>(gray, bbox)?;
    Ok(MomentDescriptor { hu: m.hu() })
}
