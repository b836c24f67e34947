//! Quadrant-average LAB color descriptor.

use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, ColorSpace, ImageBuffer};

/// Mean of `l + a + b` over each box quadrant, ordered top-left, top-right,
/// bottom-left, bottom-right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorDescriptor {
    pub mu: [f64; 4],
}

/// Quadrants of `bbox` split at the floor midpoints; odd extra rows and
/// columns belong to the bottom and right quadrants.
pub fn quadrants(bbox: &BoundingBox) -> [BoundingBox; 4] {
    let mx = bbox.x_min + bbox.width() / 2;
    let my = bbox.y_min + bbox.height() / 2;
    let b = |x0, y0, x1, y1| BoundingBox {
        x_min: x0,
        y_min: y0,
        x_max: x1,
        y_max: y1,
    };
    [
        b(bbox.x_min, bbox.y_min, mx, my),
        b(mx, bbox.y_min, bbox.x_max, my),
        b(bbox.x_min, my, mx, bbox.y_max),
        b(mx, my, bbox.x_max, bbox.y_max),
    ]
}

pub fn quadrant_color_means(img: &ImageBuffer, bbox: &BoundingBox) -> Result<ColorDescriptor> {
    img.expect_space(ColorSpace::LabF32)?;
    if !bbox.fits_within(img.width(), img.height()) {
        return Err(Error::OutOfBounds {
            bbox: *bbox,
            width: img.width(),
            height: img.height(),
        });
    }
    if bbox.width() < 2 || bbox.height() < 2 {
        return Err(Error::DegenerateRegion(*bbox));
    }
    let data = img.f32_samples().expect("LAB buffer");
    let stride = img.width() as usize * 3;
    let mut mu = [0.0; 4];
    for (slot, q) in mu.iter_mut().zip(quadrants(bbox)) {
        let mut sum = 0.0f64;
        for y in q.y_min..q.y_max {
            let row = &data[y as usize * stride..(y as usize + 1) * stride];
            sum += row[q.x_min as usize * 3..q.x_max as usize * 3]
                .iter()
                .map(|&v| v as f64)
                .sum::<f64>();
        }
        *slot = sum / q.area() as f64;
    }
    Ok(ColorDescriptor { mu })
}
