//! Pixel-level primitives: buffers, boxes, color conversion, smoothing,
//! thresholding and cropping.
//!
//! Every operation is a pure function of its inputs.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    /// 8-bit sRGB, channel interleaved.
    Rgb8,
    /// CIE L*a*b* (D65), `f32` per channel.
    LabF32,
    Gray8,
    /// Single channel, samples restricted to {0, 255}.
    Binary,
}

impl ColorSpace {
    pub fn channel_count(self) -> usize {
        match self {
            ColorSpace::Rgb8 | ColorSpace::LabF32 => 3,
            ColorSpace::Gray8 | ColorSpace::Binary => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Samples {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

/// Owned row-major raster.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    color_space: ColorSpace,
    samples: Samples,
}

impl ImageBuffer {
    fn check_len(width: u32, height: u32, space: ColorSpace, len: usize) -> Result<()> {
        let expected = width as usize * height as usize * space.channel_count();
        if len != expected {
            return Err(Error::contract(format!(
                "{width}x{height} {space:?} image needs {expected} samples, got {len}"
            )));
        }
        Ok(())
    }

    pub fn from_rgb8(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        Self::check_len(width, height, ColorSpace::Rgb8, data.len())?;
        Ok(Self {
            width,
            height,
            color_space: ColorSpace::Rgb8,
            samples: Samples::U8(data),
        })
    }

    pub fn from_gray8(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        Self::check_len(width, height, ColorSpace::Gray8, data.len())?;
        Ok(Self {
            width,
            height,
            color_space: ColorSpace::Gray8,
            samples: Samples::U8(data),
        })
    }

    pub fn from_binary(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        Self::check_len(width, height, ColorSpace::Binary, data.len())?;
        if let Some(v) = data.iter().find(|&&v| v != 0 && v != 255) {
            return Err(Error::contract(format!("binary sample {v} not in {{0, 255}}")));
        }
        Ok(Self {
            width,
            height,
            color_space: ColorSpace::Binary,
            samples: Samples::U8(data),
        })
    }

    pub fn from_lab(width: u32, height: u32, data: Vec<f32>) -> Result<Self> {
        Self::check_len(width, height, ColorSpace::LabF32, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("non-finite LAB sample"));
        }
        Ok(Self {
            width,
            height,
            color_space: ColorSpace::LabF32,
            samples: Samples::F32(data),
        })
    }

    pub fn filled_rgb(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Self::from_rgb8(width, height, data).expect("length matches by construction")
    }

    pub fn filled_gray(width: u32, height: u32, value: u8) -> Self {
        Self::from_gray8(width, height, vec![value; width as usize * height as usize])
            .expect("length matches by construction")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn color_space(&self) -> ColorSpace {
        self.color_space
    }

    pub fn full_box(&self) -> BoundingBox {
        BoundingBox {
            x_min: 0,
            y_min: 0,
            x_max: self.width,
            y_max: self.height,
        }
    }

    /// Raw 8-bit samples; `None` for LAB buffers.
    pub fn u8_samples(&self) -> Option<&[u8]> {
        match &self.samples {
            Samples::U8(v) => Some(v),
            Samples::F32(_) => None,
        }
    }

    pub fn f32_samples(&self) -> Option<&[f32]> {
        match &self.samples {
            Samples::F32(v) => Some(v),
            Samples::U8(_) => None,
        }
    }

    pub fn into_u8_samples(self) -> Option<Vec<u8>> {
        match self.samples {
            Samples::U8(v) => Some(v),
            Samples::F32(_) => None,
        }
    }

    pub fn expect_space(&self, expected: ColorSpace) -> Result<()> {
        if self.color_space != expected {
            return Err(Error::ColorSpace {
                expected,
                actual: self.color_space,
            });
        }
        Ok(())
    }

    pub(crate) fn bytes_of(&self, expected: ColorSpace) -> Result<&[u8]> {
        self.expect_space(expected)?;
        Ok(self.u8_samples().expect("8-bit color space holds u8 samples"))
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.color_space.channel_count()
    }

    /// Single-channel sample at (x, y). Panics on multi-channel or LAB buffers.
    #[inline]
    pub fn luma(&self, x: u32, y: u32) -> u8 {
        debug_assert_eq!(self.color_space.channel_count(), 1);
        self.u8_samples().expect("8-bit buffer")[self.index(x, y)]
    }

    #[inline]
    pub fn rgb(&self, x: u32, y: u32) -> [u8; 3] {
        debug_assert_eq!(self.color_space, ColorSpace::Rgb8);
        let i = self.index(x, y);
        let d = self.u8_samples().expect("8-bit buffer");
        [d[i], d[i + 1], d[i + 2]]
    }

    #[inline]
    pub fn lab(&self, x: u32, y: u32) -> [f32; 3] {
        debug_assert_eq!(self.color_space, ColorSpace::LabF32);
        let i = self.index(x, y);
        let d = self.f32_samples().expect("LAB buffer");
        [d[i], d[i + 1], d[i + 2]]
    }

    /// Reinterpret a binary mask as an ordinary grayscale image.
    pub fn binary_as_gray(mut self) -> Result<Self> {
        self.expect_space(ColorSpace::Binary)?;
        self.color_space = ColorSpace::Gray8;
        Ok(self)
    }
}

/// Axis-aligned box in pixel coordinates, half-open on the max edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BoundingBox {
    pub fn new(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Result<Self> {
        if x_min >= x_max || y_min >= y_max {
            return Err(Error::contract(format!(
                "empty box [{x_min}, {y_min}, {x_max}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn width(&self) -> u32 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.x_min < self.x_max && self.y_min < self.y_max && self.x_max <= width && self.y_max <= height
    }

    pub fn intersection(&self, other: &BoundingBox) -> u64 {
        let w = self.x_max.min(other.x_max).saturating_sub(self.x_min.max(other.x_min));
        let h = self.y_max.min(other.y_max).saturating_sub(self.y_min.max(other.y_min));
        w as u64 * h as u64
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection(other);
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}]",
            self.x_min, self.y_min, self.x_max, self.y_max
        )
    }
}

// sRGB primaries to XYZ, D65.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

// Reference white is the image of sRGB white under the matrix above, so that
// (255, 255, 255) lands exactly on a = b = 0.
const WHITE: [f64; 3] = [
    RGB_TO_XYZ[0][0] + RGB_TO_XYZ[0][1] + RGB_TO_XYZ[0][2],
    RGB_TO_XYZ[1][0] + RGB_TO_XYZ[1][1] + RGB_TO_XYZ[1][2],
    RGB_TO_XYZ[2][0] + RGB_TO_XYZ[2][1] + RGB_TO_XYZ[2][2],
];

const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.003_130_8 {
        c * 12.92
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let t = f * f * f;
    if t > LAB_EPSILON {
        t
    } else {
        (116.0 * f - 16.0) / LAB_KAPPA
    }
}

/// Convert one 8-bit sRGB pixel to L*a*b*.
pub fn srgb_pixel_to_lab(rgb: [u8; 3]) -> [f32; 3] {
    let lin = rgb.map(|c| srgb_to_linear(c as f64 / 255.0));
    let mut f = [0.0; 3];
    for (row, out) in f.iter_mut().enumerate() {
        let v = RGB_TO_XYZ[row][0] * lin[0] + RGB_TO_XYZ[row][1] * lin[1] + RGB_TO_XYZ[row][2] * lin[2];
        *out = lab_f(v / WHITE[row]);
    }
    let l = (116.0 * f[1] - 16.0).clamp(0.0, 100.0);
    let a = (500.0 * (f[0] - f[1])).clamp(-128.0, 127.0);
    let b = (200.0 * (f[1] - f[2])).clamp(-128.0, 127.0);
    [l as f32, a as f32, b as f32]
}

/// Inverse of [`srgb_pixel_to_lab`], rounding and clamping to 8 bits.
pub fn lab_pixel_to_srgb(lab: [f32; 3]) -> [u8; 3] {
    let [l, a, b] = lab.map(|v| v as f64);
    let fy = (l + 16.0) / 116.0;
    let fx = fy + a / 500.0;
    let fz = fy - b / 200.0;
    let xyz = [
        lab_f_inv(fx) * WHITE[0],
        lab_f_inv(fy) * WHITE[1],
        lab_f_inv(fz) * WHITE[2],
    ];
    let inv = invert3(&RGB_TO_XYZ);
    let mut out = [0u8; 3];
    for (row, o) in out.iter_mut().enumerate() {
        let lin = inv[row][0] * xyz[0] + inv[row][1] * xyz[1] + inv[row][2] * xyz[2];
        *o = (linear_to_srgb(lin.clamp(0.0, 1.0)) * 255.0).round().clamp(0.0, 255.0) as u8;
    }
    out
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            // cofactor of (c, r)
            let (r0, r1) = ((c + 1) % 3, (c + 2) % 3);
            let (c0, c1) = ((r + 1) % 3, (r + 2) % 3);
            *v = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    inv
}

pub fn rgb_to_lab(img: &ImageBuffer) -> Result<ImageBuffer> {
    let data = img.bytes_of(ColorSpace::Rgb8)?;
    let lab = data
        .chunks_exact(3)
        .flat_map(|px| srgb_pixel_to_lab([px[0], px[1], px[2]]))
        .collect();
    ImageBuffer::from_lab(img.width, img.height, lab)
}

pub fn lab_to_rgb(img: &ImageBuffer) -> Result<ImageBuffer> {
    img.expect_space(ColorSpace::LabF32)?;
    let data = img.f32_samples().expect("LAB buffer");
    let rgb = data
        .chunks_exact(3)
        .flat_map(|px| lab_pixel_to_srgb([px[0], px[1], px[2]]))
        .collect();
    ImageBuffer::from_rgb8(img.width, img.height, rgb)
}

/// BT.601 luma.
pub fn to_grayscale(img: &ImageBuffer) -> Result<ImageBuffer> {
    let data = img.bytes_of(ColorSpace::Rgb8)?;
    let gray = data
        .chunks_exact(3)
        .map(|px| {
            let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    ImageBuffer::from_gray8(img.width, img.height, gray)
}

/// Normalized 1-D Gaussian taps for radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::contract(format!("gaussian sigma must be > 0, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    Ok(taps)
}

/// Separable Gaussian smoothing with replicated borders.
pub fn gaussian_blur(img: &ImageBuffer, sigma: f64) -> Result<ImageBuffer> {
    let data = img.bytes_of(ColorSpace::Gray8)?;
    let taps = gaussian_kernel(sigma)?;
    let radius = (taps.len() / 2) as i64;
    let (w, h) = (img.width as i64, img.height as i64);

    let mut horizontal = vec![0.0f64; data.len()];
    for y in 0..h {
        let row = &data[(y * w) as usize..((y + 1) * w) as usize];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, tap) in taps.iter().enumerate() {
                let sx = (x + k as i64 - radius).clamp(0, w - 1);
                acc += tap * row[sx as usize] as f64;
            }
            horizontal[(y * w + x) as usize] = acc;
        }
    }

    let mut out = vec![0u8; data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, tap) in taps.iter().enumerate() {
                let sy = (y + k as i64 - radius).clamp(0, h - 1);
                acc += tap * horizontal[(sy * w + x) as usize];
            }
            out[(y * w + x) as usize] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    ImageBuffer::from_gray8(img.width, img.height, out)
}

/// Suppress pixels at or below `threshold`; everything brighter becomes 255.
pub fn binarize(img: &ImageBuffer, threshold: u8) -> Result<ImageBuffer> {
    let data = img.bytes_of(ColorSpace::Gray8)?;
    let out = data
        .iter()
        .map(|&v| if v <= threshold { 0 } else { 255 })
        .collect();
    ImageBuffer::from_binary(img.width, img.height, out)
}

pub fn crop(img: &ImageBuffer, bbox: &BoundingBox) -> Result<ImageBuffer> {
    if !bbox.fits_within(img.width, img.height) {
        return Err(Error::OutOfBounds {
            bbox: *bbox,
            width: img.width,
            height: img.height,
        });
    }
    let ch = img.color_space.channel_count();
    let row_len = bbox.width() as usize * ch;
    let rows = bbox.y_min..bbox.y_max;
    let samples = match &img.samples {
        Samples::U8(d) => Samples::U8(
            rows.flat_map(|y| {
                let start = img.index(bbox.x_min, y);
                d[start..start + row_len].iter().copied()
            })
            .collect(),
        ),
        Samples::F32(d) => Samples::F32(
            rows.flat_map(|y| {
                let start = img.index(bbox.x_min, y);
                d[start..start + row_len].iter().copied()
            })
            .collect(),
        ),
    };
    Ok(ImageBuffer {
        width: bbox.width(),
        height: bbox.height(),
        color_space: img.color_space,
        samples,
    })
}

/// Nearest-neighbor resampling; source index is `floor(dst * src_len / dst_len)`.
pub fn resize_nearest(img: &ImageBuffer, width: u32, height: u32) -> Result<ImageBuffer> {
    if width == 0 || height == 0 {
        return Err(Error::contract("resize target must be non-empty"));
    }
    let ch = img.color_space.channel_count();
    let src_x: Vec<u32> = (0..width)
        .map(|x| (x as u64 * img.width as u64 / width as u64) as u32)
        .collect();
    let src_y = (0..height).map(|y| (y as u64 * img.height as u64 / height as u64) as u32);
    let samples = match &img.samples {
        Samples::U8(d) => {
            let mut out = Vec::with_capacity(width as usize * height as usize * ch);
            for sy in src_y {
                for &sx in &src_x {
                    let i = img.index(sx, sy);
                    out.extend_from_slice(&d[i..i + ch]);
                }
            }
            Samples::U8(out)
        }
        Samples::F32(d) => {
            let mut out = Vec::with_capacity(width as usize * height as usize * ch);
            for sy in src_y {
                for &sx in &src_x {
                    let i = img.index(sx, sy);
                    out.extend_from_slice(&d[i..i + ch]);
                }
            }
            Samples::F32(out)
        }
    };
    Ok(ImageBuffer {
        width,
        height,
        color_space: img.color_space,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Scalar reference conversion written out directly from the sRGB and
    // CIE 1976 definitions, with the D65 tristimulus white.
    fn reference_lab(rgb: [u8; 3]) -> [f64; 3] {
        let lin: Vec<f64> = rgb
            .iter()
            .map(|&c| {
                let c = c as f64 / 255.0;
                if c <= 0.04045 {
                    c / 12.92
                } else {
                    ((c + 0.055) / 1.055).powf(2.4)
                }
            })
            .collect();
        let x = 0.4124564 * lin[0] + 0.3575761 * lin[1] + 0.1804375 * lin[2];
        let y = 0.2126729 * lin[0] + 0.7151522 * lin[1] + 0.0721750 * lin[2];
        let z = 0.0193339 * lin[0] + 0.1191920 * lin[1] + 0.9503041 * lin[2];
        let f = |t: f64| {
            let d: f64 = 6.0 / 29.0;
            if t > d * d * d {
                t.cbrt()
            } else {
                t / (3.0 * d * d) + 4.0 / 29.0
            }
        };
        let (fx, fy, fz) = (f(x / 0.95047), f(y / 1.0), f(z / 1.08883));
        [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
    }

    #[test]
    fn white_and_black_lab() {
        let white = srgb_pixel_to_lab([255, 255, 255]);
        assert!((white[0] - 100.0).abs() < 1e-4);
        assert!(white[1].abs() < 0.5 && white[2].abs() < 0.5);
        assert_eq!(srgb_pixel_to_lab([0, 0, 0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn red_matches_reference() {
        let got = srgb_pixel_to_lab([255, 0, 0]);
        let want = reference_lab([255, 0, 0]);
        for c in 0..3 {
            assert!((got[c] as f64 - want[c]).abs() < 0.1, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn lab_rejects_gray_input() {
        let gray = ImageBuffer::filled_gray(2, 2, 7);
        assert!(matches!(rgb_to_lab(&gray), Err(Error::ColorSpace { .. })));
        assert!(matches!(to_grayscale(&gray), Err(Error::ColorSpace { .. })));
    }

    #[test]
    fn grayscale_weights() {
        let img = ImageBuffer::from_rgb8(3, 1, vec![255, 255, 255, 0, 0, 0, 100, 150, 200]).unwrap();
        let g = to_grayscale(&img).unwrap();
        assert_eq!(g.u8_samples().unwrap(), &[255, 0, 141]);
    }

    #[test]
    fn blur_rejects_bad_sigma() {
        let img = ImageBuffer::filled_gray(4, 4, 10);
        assert!(gaussian_blur(&img, 0.0).is_err());
        assert!(gaussian_blur(&img, -1.0).is_err());
    }

    #[test]
    fn blur_preserves_constant() {
        let img = ImageBuffer::filled_gray(9, 7, 93);
        for sigma in [0.3, 1.0, 2.5] {
            assert_eq!(gaussian_blur(&img, sigma).unwrap(), img);
        }
    }

    #[test]
    fn blur_impulse_keeps_peak_and_mass() {
        let mut data = vec![0u8; 21 * 21];
        data[10 * 21 + 10] = 255;
        let img = ImageBuffer::from_gray8(21, 21, data).unwrap();
        let out = gaussian_blur(&img, 1.0).unwrap();
        let d = out.u8_samples().unwrap();
        let peak = d[10 * 21 + 10];
        assert!(d.iter().all(|&v| v <= peak));
        let total: i64 = d.iter().map(|&v| v as i64).sum();
        // each of the 49 nonzero taps rounds by at most 0.5
        assert!((total - 255).abs() <= 25, "total {total}");
    }

    #[test]
    fn blur_matches_dense_convolution() {
        let mut data = vec![0u8; 25];
        data[12] = 200;
        let img = ImageBuffer::from_gray8(5, 5, data.clone()).unwrap();
        let out = gaussian_blur(&img, 1.0).unwrap();
        // dense oracle: full 2-D kernel, clamped borders
        let r = 3i64;
        let g = |d: i64| (-(d * d) as f64 / 2.0).exp();
        let norm: f64 = (-r..=r).map(g).sum();
        for y in 0..5i64 {
            for x in 0..5i64 {
                let mut acc = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let sx = (x + dx).clamp(0, 4);
                        let sy = (y + dy).clamp(0, 4);
                        acc += g(dx) * g(dy) / (norm * norm) * data[(sy * 5 + sx) as usize] as f64;
                    }
                }
                let got = out.luma(x as u32, y as u32) as f64;
                assert!((got - acc).abs() <= 1.0, "({x},{y}) {got} vs {acc}");
            }
        }
    }

    #[test]
    fn binarize_boundary() {
        let img = ImageBuffer::from_gray8(4, 1, vec![40, 50, 51, 200]).unwrap();
        let b = binarize(&img, 50).unwrap();
        assert_eq!(b.color_space(), ColorSpace::Binary);
        assert_eq!(b.u8_samples().unwrap(), &[0, 0, 255, 255]);
        let zeros = binarize(&ImageBuffer::filled_gray(3, 3, 0), 50).unwrap();
        assert!(zeros.u8_samples().unwrap().iter().all(|&v| v == 0));
        let full = binarize(&ImageBuffer::filled_gray(3, 3, 255), 50).unwrap();
        assert!(full.u8_samples().unwrap().iter().all(|&v| v == 255));
    }

    #[test]
    fn crop_out_of_bounds_reports_box() {
        let img = ImageBuffer::filled_rgb(10, 10, [1, 2, 3]);
        let bad = BoundingBox::new(5, 5, 11, 8).unwrap();
        match crop(&img, &bad) {
            Err(Error::OutOfBounds { bbox, .. }) => assert_eq!(bbox, bad),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn crop_extracts_region() {
        let data: Vec<u8> = (0..20).collect();
        let img = ImageBuffer::from_gray8(5, 4, data).unwrap();
        let c = crop(&img, &BoundingBox::new(1, 1, 3, 3).unwrap()).unwrap();
        assert_eq!(c.u8_samples().unwrap(), &[6, 7, 11, 12]);
    }

    #[test]
    fn box_iou() {
        let a = BoundingBox::new(0, 0, 10, 10).unwrap();
        let b = BoundingBox::new(5, 0, 15, 10).unwrap();
        assert!((a.iou(&b) - 50.0 / 150.0).abs() < 1e-12);
        assert_eq!(a.iou(&a), 1.0);
        assert!(BoundingBox::new(3, 0, 3, 1).is_err());
    }

    proptest! {
        #[test]
        fn lab_round_trip(r in 0u8..=255, g in 0u8..=255, b in 0u8..=255) {
            let back = lab_pixel_to_srgb(srgb_pixel_to_lab([r, g, b]));
            for (orig, got) in [r, g, b].iter().zip(back) {
                prop_assert!((*orig as i32 - got as i32).abs() <= 1, "{:?} -> {:?}", [r, g, b], back);
            }
        }

        #[test]
        fn blur_is_linear(seed in any::<u64>(), scale in 1u8..=3) {
            let mut state = seed;
            let base: Vec<u8> = (0..64).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 80) as u8
            }).collect();
            let scaled: Vec<u8> = base.iter().map(|&v| v * scale).collect();
            let a = gaussian_blur(&ImageBuffer::from_gray8(8, 8, base).unwrap(), 1.2).unwrap();
            let b = gaussian_blur(&ImageBuffer::from_gray8(8, 8, scaled).unwrap(), 1.2).unwrap();
            for (x, y) in a.u8_samples().unwrap().iter().zip(b.u8_samples().unwrap()) {
                let diff = (*x as i32 * scale as i32 - *y as i32).abs();
                // rounding error of the unscaled output is amplified by `scale`
                prop_assert!(diff <= scale as i32, "{} * {} vs {}", x, scale, y);
            }
        }

        #[test]
        fn binarize_idempotent(data in proptest::collection::vec(any::<u8>(), 16), t in 0u8..255) {
            let once = binarize(&ImageBuffer::from_gray8(4, 4, data).unwrap(), t).unwrap();
            let twice = binarize(&once.clone().binary_as_gray().unwrap(), t).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn full_frame_crop_is_identity(w in 1u32..12, h in 1u32..12, fill in any::<u8>()) {
            let img = ImageBuffer::filled_rgb(w, h, [fill, fill / 2, 3]);
            prop_assert_eq!(crop(&img, &img.full_box()).unwrap(), img);
        }
    }
}
