//! Spatial, central and normalized moments up to order three, and Hu's
//! seven invariants.

use crate::error::{Error, Result};
use crate::imaging::{crop, BoundingBox, ColorSpace, ImageBuffer};
use crate::scalar::Scalar;

/// Moments of an intensity image. Coordinates are pixel indices relative to
/// the crop origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageMoments<T> {
    pub m00: T,
    pub m10: T,
    pub m01: T,
    pub m20: T,
    pub m11: T,
    pub m02: T,
    pub m30: T,
    pub m21: T,
    pub m12: T,
    pub m03: T,
    pub centroid: (T, T),
    pub mu20: T,
    pub mu11: T,
    pub mu02: T,
    pub mu30: T,
    pub mu21: T,
    pub mu12: T,
    pub mu03: T,
}

impl<T: Scalar> ImageMoments<T> {
    /// Central moment of order (p, q), p + q <= 3. First-order central
    /// moments vanish identically.
    pub fn mu(&self, p: u32, q: u32) -> T {
        match (p, q) {
            (0, 0) => self.m00,
            (1, 0) | (0, 1) => T::zero(),
            (2, 0) => self.mu20,
            (1, 1) => self.mu11,
            (0, 2) => self.mu02,
            (3, 0) => self.mu30,
            (2, 1) => self.mu21,
            (1, 2) => self.mu12,
            (0, 3) => self.mu03,
            _ => panic!("moment order ({p}, {q}) not tracked"),
        }
    }

    /// `eta_pq = mu_pq / m00^(1 + (p + q) / 2)`.
    pub fn eta(&self, p: u32, q: u32) -> T {
        let exponent = T::one() + T::lit((p + q) as f64 / 2.0);
        self.mu(p, q) / self.m00.powf(exponent)
    }

    pub fn hu(&self) -> [T; 7] {
        let n20 = self.eta(2, 0);
        let n02 = self.eta(0, 2);
        let n11 = self.eta(1, 1);
        let n30 = self.eta(3, 0);
        let n21 = self.eta(2, 1);
        let n12 = self.eta(1, 2);
        let n03 = self.eta(0, 3);
        let three = T::lit(3.0);
        let four = T::lit(4.0);

        let a = n30 + n12;
        let b = n21 + n03;
        let c = n30 - three * n12;
        let d = three * n21 - n03;

        [
            n20 + n02,
            (n20 - n02).powi(2) + four * n11 * n11,
            c * c + d * d,
            a * a + b * b,
            c * a * (a * a - three * b * b) + d * b * (three * a * a - b * b),
            (n20 - n02) * (a * a - b * b) + four * n11 * a * b,
            d * a * (a * a - three * b * b) - c * b * (three * a * a - b * b),
        ]
    }
}

/// Raw moments, then central moments in a second pass about the centroid.
pub fn central_moments<T: Scalar>(img: &ImageBuffer, bbox: &BoundingBox) -> Result<ImageMoments<T>> {
    img.expect_space(ColorSpace::Gray8)?;
    let region = crop(img, bbox)?;
    let data = region.u8_samples().expect("gray buffer");
    let width = region.width() as usize;

    let mut m = [T::zero(); 10];
    for (i, &v) in data.iter().enumerate() {
        if v == 0 {
            continue;
        }
        let w = T::from_u8(v).unwrap();
        let x = T::from_usize_lossy(i % width);
        let y = T::from_usize_lossy(i / width);
        let (x2, y2) = (x * x, y * y);
        m[0] += w;
        m[1] += w * x;
        m[2] += w * y;
        m[3] += w * x2;
        m[4] += w * x * y;
        m[5] += w * y2;
        m[6] += w * x2 * x;
        m[7] += w * x2 * y;
        m[8] += w * x * y2;
        m[9] += w * y2 * y;
    }
    let m00 = m[0];
    if m00 == T::zero() {
        return Err(Error::ZeroMass);
    }
    let (cx, cy) = (m[1] / m00, m[2] / m00);

    let mut mu = [T::zero(); 7];
    for (i, &v) in data.iter().enumerate() {
        if v == 0 {
            continue;
        }
        let w = T::from_u8(v).unwrap();
        let dx = T::from_usize_lossy(i % width) - cx;
        let dy = T::from_usize_lossy(i / width) - cy;
        let (dx2, dy2) = (dx * dx, dy * dy);
        mu[0] += w * dx2;
        mu[1] += w * dx * dy;
        mu[2] += w * dy2;
        mu[3] += w * dx2 * dx;
        mu[4] += w * dx2 * dy;
        mu[5] += w * dx * dy2;
        mu[6] += w * dy2 * dy;
    }

    Ok(ImageMoments {
        m00,
        m10: m[1],
        m01: m[2],
        m20: m[3],
        m11: m[4],
        m02: m[5],
        m30: m[6],
        m21: m[7],
        m12: m[8],
        m03: m[9],
        centroid: (cx, cy),
        mu20: mu[0],
        mu11: mu[1],
        mu02: mu[2],
        mu30: mu[3],
        mu21: mu[4],
        mu12: mu[5],
        mu03: mu[6],
    })
}
