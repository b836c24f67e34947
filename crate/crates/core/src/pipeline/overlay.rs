//! Identity overlays: a colored box per identified detection and its name
//! set in a 5x7 bitmap font.

use crate::error::{Error, Result};
use crate::imaging::{ColorSpace, ImageBuffer};
use crate::pipeline::detections::Detection;

/// Distinct saturated colors, handed out in identity order.
const PALETTE: [[u8; 3]; 8] = [
    [255, 215, 0],
    [255, 64, 160],
    [0, 255, 128],
    [0, 200, 255],
    [255, 128, 0],
    [180, 110, 255],
    [255, 255, 255],
    [120, 255, 40],
];
const UNKNOWN: [u8; 3] = [128, 128, 128];

/// Fixed color per identity, by position in the identity order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdentityPalette {
    names: Vec<String>,
}

impl IdentityPalette {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        Self {
            names: names.iter().map(|n| n.as_ref().to_string()).collect(),
        }
    }

    pub fn color(&self, identity: Option<&str>) -> [u8; 3] {
        identity
            .and_then(|id| self.names.iter().position(|n| n == id))
            .map_or(UNKNOWN, |i| PALETTE[i % PALETTE.len()])
    }
}

// Rows top to bottom, bit 4 is the leftmost column.
fn glyph(c: char) -> [u8; 7] {
    match c.to_ascii_uppercase() {
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '_' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        ' ' => [0x00; 7],
        _ => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04],
    }
}

const SCALE: u32 = 2;
const ADVANCE: u32 = 6 * SCALE;
const LINE: u32 = 7 * SCALE;
const THICKNESS: u32 = 2;

struct Canvas<'a> {
    w: u32,
    h: u32,
    data: &'a mut [u8],
}

impl Canvas<'_> {
    fn put(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as u32) < self.w && (y as u32) < self.h {
            let i = ((y as u32 * self.w + x as u32) * 3) as usize;
            self.data[i..i + 3].copy_from_slice(&c);
        }
    }

    fn fill(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, c: [u8; 3]) {
        for y in y0..y1 {
            for x in x0..x1 {
                self.put(x, y, c);
            }
        }
    }

    fn text(&mut self, x: i64, y: i64, s: &str, c: [u8; 3]) {
        for (k, ch) in s.chars().enumerate() {
            let ox = x + (k as u32 * ADVANCE) as i64;
            for (row, bits) in glyph(ch).iter().enumerate() {
                for col in 0..5 {
                    if bits & (0x10 >> col) != 0 {
                        let px = ox + (col * SCALE) as i64;
                        let py = y + (row as u32 * SCALE) as i64;
                        self.fill(px, py, px + SCALE as i64, py + SCALE as i64, c);
                    }
                }
            }
        }
    }
}

/// Copy of `frame` with every detection of the frame boxed and labeled.
/// Detections without an identity are drawn in gray without a label.
pub fn render_overlay(frame: &ImageBuffer, detections: &[Detection], palette: &IdentityPalette) -> Result<ImageBuffer> {
    frame.expect_space(ColorSpace::Rgb8)?;
    let (w, h) = (frame.width(), frame.height());
    if let Some(d) = detections.iter().find(|d| !d.bbox.fits_within(w, h)) {
        return Err(Error::OutOfBounds { bbox: d.bbox, width: w, height: h });
    }
    let mut data = frame.u8_samples().expect("RGB8 buffer").to_vec();
    let mut canvas = Canvas { w, h, data: &mut data };
    let t = THICKNESS as i64;
    for d in detections {
        let c = palette.color(d.identity.as_deref());
        let b = d.bbox;
        let (x0, y0, x1, y1) = (b.x_min as i64, b.y_min as i64, b.x_max as i64, b.y_max as i64);
        canvas.fill(x0, y0, x1, (y0 + t).min(y1), c);
        canvas.fill(x0, (y1 - t).max(y0), x1, y1, c);
        canvas.fill(x0, y0, (x0 + t).min(x1), y1, c);
        canvas.fill((x1 - t).max(x0), y0, x1, y1, c);
        if let Some(name) = &d.identity {
            let label_w = name.chars().count() as i64 * ADVANCE as i64 + 2;
            let top = if y0 >= LINE as i64 + 4 { y0 - LINE as i64 - 4 } else { y0 + t };
            canvas.fill(x0, top, x0 + label_w, top + LINE as i64 + 4, c);
            canvas.text(x0 + 2, top + 2, name, [0, 0, 0]);
        }
    }
    ImageBuffer::from_rgb8(w, h, data)
}
