//! Assembly of the 18-dimensional descriptor for one detection.

use crate::clustering::{FeatureVector, FEATURE_DIMS};
use crate::config::FeatureConfig;
use crate::error::{Error, Result};
use crate::features::shape::{edge_contours, hu_moments, hull_centroid};
use crate::features::{average_amplitude, edge_centroid, quadrant_color_means};
use crate::imaging::{crop, rgb_to_lab, to_grayscale, BoundingBox, ColorSpace, ImageBuffer};

/// Failures that skip one detection instead of aborting the session.
pub fn is_soft_failure(e: &Error) -> bool {
    matches!(e, Error::ZeroMass | Error::DegenerateRegion(_))
}

/// An RGB frame together with its grayscale version, shared by all
/// detections of the frame.
pub struct PreparedFrame<'a> {
    rgb: &'a ImageBuffer,
    gray: ImageBuffer,
}

impl<'a> PreparedFrame<'a> {
    pub fn new(rgb: &'a ImageBuffer) -> Result<Self> {
        rgb.expect_space(ColorSpace::Rgb8)?;
        Ok(Self {
            rgb,
            gray: to_grayscale(rgb)?,
        })
    }

    pub fn features(&self, bbox: &BoundingBox, cfg: &FeatureConfig) -> Result<[f64; FEATURE_DIMS]> {
        let (w, h) = (self.rgb.width(), self.rgb.height());
        if !bbox.fits_within(w, h) {
            return Err(Error::OutOfBounds { bbox: *bbox, width: w, height: h });
        }
        // LAB conversion is per pixel, so converting the crop equals
        // cropping the converted frame.
        let lab = rgb_to_lab(&crop(self.rgb, bbox)?)?;
        let color = quadrant_color_means(&lab, &lab.full_box())?;
        let amp = average_amplitude(self.rgb, bbox, &cfg.spectrum)?;
        let contours = edge_contours(&self.gray, bbox, &cfg.canny, cfg.rdp_epsilon)?;
        let edge = edge_centroid(&contours, bbox, cfg.centroid_mode);
        let hull = hull_centroid(&self.gray, bbox, cfg.hull_threshold, cfg.centroid_mode)?;
        let hu = hu_moments(&self.gray, bbox)?;

        let mut dims = [0.0; FEATURE_DIMS];
        dims[0..4].copy_from_slice(&color.mu);
        dims[4..7].copy_from_slice(&amp.amp);
        dims[7] = edge.centroid.0;
        dims[8] = edge.centroid.1;
        dims[9] = hull.centroid.0;
        dims[10] = hull.centroid.1;
        dims[11..18].copy_from_slice(&hu.hu);
        if let Some(i) = dims.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!("non-finite feature {i} for box {bbox}")));
        }
        Ok(dims)
    }
}

/// Descriptor of the detection at `detection_index` within its frame.
pub fn build_feature_vector(
    frame: &ImageBuffer,
    bbox: &BoundingBox,
    frame_index: u64,
    detection_index: usize,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    let dims = PreparedFrame::new(frame)?.features(bbox, cfg)?;
    Ok(FeatureVector {
        dims,
        frame_index,
        detection_index,
    })
}

/// One JSON object per line: `frame_index`, `detection_index` and the 18
/// `features` in storage order.
pub fn features_to_jsonl(vectors: &[FeatureVector]) -> String {
    let mut out = String::new();
    for v in vectors {
        let line = serde_json::json!({
            "frame_index": v.frame_index,
            "detection_index": v.detection_index,
            "features": v.dims.to_vec(),
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
