//! Mean spectral amplitude per RGB channel.
//!
//! The forward transform is unnormalized:
//! `F(k, l) = sum_i sum_j f(i, j) exp(-2 pi i (k i / M + l j / N))`.
//! Power-of-two lengths go through an iterative radix-2 FFT; other lengths
//! fall back to a direct 1-D DFT along that axis.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::imaging::{crop, resize_nearest, BoundingBox, ColorSpace, ImageBuffer};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::contract(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumDescriptor {
    /// Mean |F| for the R, G and B channels.
    pub amp: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Side of the square grid the crop is resampled to.
    pub size: usize,
    pub include_dc: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            size: 128,
            include_dc: true,
        }
    }
}

struct Plan<T> {
    len: usize,
    // exp(-2 pi i k / len), k < len
    twiddles: Vec<Complex<T>>,
    bit_reverse: Option<Vec<usize>>,
}

impl<T: Scalar> Plan<T> {
    fn new(len: usize) -> Self {
        let tau = T::TAU();
        let n = T::from_usize_lossy(len);
        let twiddles = (0..len)
            .map(|k| {
                let angle = -tau * T::from_usize_lossy(k) / n;
                Complex::new(angle.cos(), angle.sin())
            })
            .collect();
        let bit_reverse = len.is_power_of_two().then(|| {
            let bits = len.trailing_zeros();
            (0..len)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                .collect()
        });
        Self {
            len,
            twiddles,
            bit_reverse,
        }
    }

    fn transform(&self, buf: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>) {
        debug_assert_eq!(buf.len(), self.len);
        match &self.bit_reverse {
            Some(rev) => self.radix2(buf, rev),
            None => self.direct(buf, scratch),
        }
    }

    fn radix2(&self, buf: &mut [Complex<T>], rev: &[usize]) {
        let n = self.len;
        for (i, &j) in rev.iter().enumerate().take(n) {
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    fn direct(&self, buf: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>) {
        let n = self.len;
        scratch.clear();
        scratch.extend_from_slice(buf);
        for (k, out) in buf.iter_mut().enumerate() {
            *out = scratch
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (j, &x)| acc + x * self.twiddles[(k * j) % n]);
        }
    }
}

/// Unnormalized forward 2-D DFT of a real matrix, computed row-column.
pub fn dft2d<T: Scalar>(channel: &Matrix<T>) -> Result<Matrix<Complex<T>>> {
    let (rows, cols) = (channel.rows, channel.cols);
    if rows == 0 || cols == 0 {
        return Err(Error::contract("dft2d of an empty matrix"));
    }
    let mut data: Vec<Complex<T>> = channel
        .data
        .iter()
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    let mut scratch = Vec::new();

    let row_plan = Plan::new(cols);
    for row in data.chunks_exact_mut(cols) {
        row_plan.transform(row, &mut scratch);
    }

    let col_plan = Plan::new(rows);
    let mut column = vec![Complex::new(T::zero(), T::zero()); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        col_plan.transform(&mut column, &mut scratch);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
    Matrix::new(rows, cols, data)
}

/// Mean of |F| over the spectrum, optionally skipping the DC bin.
pub fn mean_amplitude<T: Scalar>(spectrum: &Matrix<Complex<T>>, include_dc: bool) -> T {
    let skip = usize::from(!include_dc);
    let count = spectrum.data.len() - skip;
    if count == 0 {
        return T::zero();
    }
    let total: T = spectrum.data.iter().skip(skip).map(|z| z.norm()).sum();
    total / T::from_usize_lossy(count)
}

/// Resample the crop to `size x size`, then take the mean spectral amplitude
/// of each color channel.
pub fn average_amplitude(
    img: &ImageBuffer,
    bbox: &BoundingBox,
    opts: &SpectrumOptions,
) -> Result<SpectrumDescriptor> {
    img.expect_space(ColorSpace::Rgb8)?;
    if opts.size == 0 {
        return Err(Error::contract("spectrum grid size must be positive"));
    }
    let side = opts.size as u32;
    let grid = resize_nearest(&crop(img, bbox)?, side, side)?;
    let samples = grid.u8_samples().expect("RGB8 buffer");
    let mut amp = [0.0; 3];
    for (c, out) in amp.iter_mut().enumerate() {
        let channel: Vec<f64> = samples.iter().skip(c).step_by(3).map(|&v| v as f64).collect();
        let spectrum = dft2d(&Matrix::new(opts.size, opts.size, channel)?)?;
        *out = mean_amplitude(&spectrum, opts.include_dc);
    }
    Ok(SpectrumDescriptor { amp })
}
