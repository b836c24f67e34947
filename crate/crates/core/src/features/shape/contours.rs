//! Suzuki-Abe border following on binary images.
//!
//! Both outer borders and hole borders are traced; each border records the
//! index of the border that immediately encloses it. Straight horizontal,
//! vertical and diagonal runs are compressed to their end points.

use crate::error::Result;
use crate::geometry::{Contour, Point2};
use crate::imaging::{ColorSpace, ImageBuffer};

#[derive(Debug, Clone, PartialEq)]
pub struct TracedContour {
    /// Border pixels in traversal order. An isolated pixel yields a single point.
    pub contour: Contour<i32>,
    /// Index of the enclosing border in the output list, `None` at top level.
    pub parent: Option<usize>,
    pub is_hole: bool,
}

// Neighbor offsets, counter-clockwise on screen (y grows downward).
const DIRS: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const EAST: usize = 0;
const WEST: usize = 4;

fn direction(from: (isize, isize), to: (isize, isize)) -> usize {
    let d = (to.0 - from.0, to.1 - from.1);
    DIRS.iter().position(|&o| o == d).expect("8-neighbors")
}

struct Labels {
    stride: isize,
    cells: Vec<i32>,
}

impl Labels {
    #[inline]
    fn get(&self, p: (isize, isize)) -> i32 {
        self.cells[(p.1 * self.stride + p.0) as usize]
    }

    #[inline]
    fn set(&mut self, p: (isize, isize), v: i32) {
        self.cells[(p.1 * self.stride + p.0) as usize] = v;
    }
}

#[inline]
fn step(p: (isize, isize), dir: usize) -> (isize, isize) {
    (p.0 + DIRS[dir].0, p.1 + DIRS[dir].1)
}

fn follow_border(
    labels: &mut Labels,
    start: (isize, isize),
    from: (isize, isize),
    nbd: i32,
) -> Vec<(isize, isize)> {
    // (3.1): clockwise search around the start, beginning at `from`
    let from_dir = direction(start, from);
    let first = (0..8)
        .map(|k| (from_dir + 8 - k) % 8)
        .map(|d| step(start, d))
        .find(|&p| labels.get(p) != 0);
    let Some(first) = first else {
        labels.set(start, -nbd);
        return vec![start];
    };

    let mut path = Vec::new();
    let (mut prev, mut cur) = (first, start);
    loop {
        path.push(cur);
        // (3.3): counter-clockwise search starting just after `prev`
        let back = direction(cur, prev);
        let mut east_was_zero = false;
        let mut next = cur;
        for k in 1..=8 {
            let d = (back + k) % 8;
            let p = step(cur, d);
            if labels.get(p) != 0 {
                next = p;
                break;
            }
            if d == EAST {
                east_was_zero = true;
            }
        }
        // (3.4)
        if east_was_zero {
            labels.set(cur, -nbd);
        } else if labels.get(cur) == 1 {
            labels.set(cur, nbd);
        }
        // (3.5)
        if next == start && cur == first {
            break;
        }
        prev = cur;
        cur = next;
    }
    path
}

/// Drop every point whose incoming and outgoing chain directions agree,
/// treating the path as closed.
fn compress(path: &[(isize, isize)]) -> Vec<(isize, isize)> {
    let n = path.len();
    if n < 3 {
        return path.to_vec();
    }
    (0..n)
        .filter(|&i| {
            let before = path[(i + n - 1) % n];
            let after = path[(i + 1) % n];
            let (a, b) = (path[i], after);
            (a.0 - before.0, a.1 - before.1) != (b.0 - a.0, b.1 - a.1)
        })
        .map(|i| path[i])
        .collect()
}

/// Trace all borders of the foreground (255) pixels.
pub fn trace_contours(binary: &ImageBuffer) -> Result<Vec<TracedContour>> {
    let data = binary.bytes_of(ColorSpace::Binary)?;
    let (w, h) = (binary.width() as isize, binary.height() as isize);
    let stride = w + 2;
    let mut labels = Labels {
        stride,
        cells: vec![0; (stride * (h + 2)) as usize],
    };
    for y in 0..h {
        for x in 0..w {
            if data[(y * w + x) as usize] != 0 {
                labels.set((x + 1, y + 1), 1);
            }
        }
    }

    // Border number 1 is the image frame, treated as a hole border.
    // Per-border data indexed by nbd - 2.
    let mut out: Vec<TracedContour> = Vec::new();
    let mut nbd = 1i32;
    for y in 1..=h {
        let mut lnbd = 1i32;
        for x in 1..=w {
            let v = labels.get((x, y));
            if v == 0 {
                continue;
            }
            let start = if v == 1 && labels.get((x - 1, y)) == 0 {
                Some((false, step((x, y), WEST)))
            } else if v >= 1 && labels.get((x + 1, y)) == 0 {
                if v > 1 {
                    lnbd = v;
                }
                Some((true, step((x, y), EAST)))
            } else {
                None
            };

            if let Some((is_hole, from)) = start {
                nbd += 1;
                let (neighbor_hole, neighbor_parent) = if lnbd == 1 {
                    (true, None)
                } else {
                    let b = &out[(lnbd - 2) as usize];
                    (b.is_hole, b.parent)
                };
                let neighbor = (lnbd >= 2).then(|| (lnbd - 2) as usize);
                let parent = if is_hole == neighbor_hole {
                    neighbor_parent
                } else {
                    neighbor
                };
                let path = follow_border(&mut labels, (x, y), from, nbd);
                let points = compress(&path)
                    .into_iter()
                    .map(|(px, py)| Point2::new(px as i32 - 1, py as i32 - 1))
                    .collect();
                out.push(TracedContour {
                    contour: Contour::new(points),
                    parent,
                    is_hole,
                });
            }

            let v = labels.get((x, y));
            if v != 1 {
                lnbd = v.abs();
            }
        }
    }
    Ok(out)
}
