//! Canny edge detector: 3x3 Sobel gradients, non-maximum suppression along
//! the quantized gradient direction, and double-threshold hysteresis.

use crate::error::{Error, Result};
use crate::imaging::{gaussian_blur, ColorSpace, ImageBuffer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub low: f64,
    pub high: f64,
    /// Gaussian pre-smoothing; `None` when the caller already smoothed.
    pub sigma: Option<f64>,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            low: 50.0,
            high: 150.0,
            sigma: Some(1.4),
        }
    }
}

// tan(22.5 deg) and tan(67.5 deg)
const TAN_22_5: f64 = 0.414_213_562_373_095_1;
const TAN_67_5: f64 = 2.414_213_562_373_095;

struct Gradients {
    gx: Vec<i32>,
    gy: Vec<i32>,
    magnitude: Vec<f64>,
}

fn sobel(data: &[u8], w: usize, h: usize) -> Gradients {
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        data[y * w + x] as i32
    };
    let mut gx = vec![0; w * h];
    let mut gy = vec![0; w * h];
    let mut magnitude = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let dx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
            let dy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
            let i = y as usize * w + x as usize;
            gx[i] = dx;
            gy[i] = dy;
            magnitude[i] = ((dx * dx + dy * dy) as f64).sqrt();
        }
    }
    Gradients { gx, gy, magnitude }
}

/// Offsets of the neighbor along the positive gradient direction (y down).
fn direction_offset(gx: i32, gy: i32) -> (isize, isize) {
    let (ax, ay) = ((gx as f64).abs(), (gy as f64).abs());
    if ay < TAN_22_5 * ax {
        (1, 0)
    } else if ay > TAN_67_5 * ax {
        (0, 1)
    } else if (gx > 0) == (gy > 0) {
        (1, 1)
    } else {
        (1, -1)
    }
}

/// Edge map of an already smoothed grayscale image. Thresholds apply to the
/// unnormalized L2 Sobel magnitude: pixels above `high` seed edges, pixels
/// above `low` extend them through 8-connectivity.
pub fn canny_edges(img: &ImageBuffer, low: f64, high: f64) -> Result<ImageBuffer> {
    let data = img.bytes_of(ColorSpace::Gray8)?;
    if !(0.0 <= low && low < high && high <= 255.0) {
        return Err(Error::contract(format!(
            "canny thresholds need 0 <= low < high <= 255, got {low}, {high}"
        )));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let grad = sobel(data, w, h);

    // 0 = suppressed, 1 = weak, 2 = strong
    let mut class = vec![0u8; w * h];
    let mut stack = Vec::new();
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let i = y * w + x;
            let m = grad.magnitude[i];
            if m <= low {
                continue;
            }
            let (ox, oy) = direction_offset(grad.gx[i], grad.gy[i]);
            let ahead = grad.magnitude[(y as isize + oy) as usize * w + (x as isize + ox) as usize];
            let behind = grad.magnitude[(y as isize - oy) as usize * w + (x as isize - ox) as usize];
            // strict on one side so a two-pixel plateau yields one pixel
            if m > behind && m >= ahead {
                if m > high {
                    class[i] = 2;
                    stack.push(i);
                } else {
                    class[i] = 1;
                }
            }
        }
    }

    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if class[j] == 1 {
                    class[j] = 2;
                    stack.push(j);
                }
            }
        }
    }

    let out = class.iter().map(|&c| if c == 2 { 255 } else { 0 }).collect();
    ImageBuffer::from_binary(img.width(), img.height(), out)
}

/// Optional Gaussian smoothing followed by [`canny_edges`].
pub fn detect_edges(img: &ImageBuffer, params: &CannyParams) -> Result<ImageBuffer> {
    match params.sigma {
        Some(sigma) => canny_edges(&gaussian_blur(img, sigma)?, params.low, params.high),
        None => canny_edges(img, params.low, params.high),
    }
}
