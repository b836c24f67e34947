//! Ramer-Douglas-Peucker polyline simplification.

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Contour};
use crate::scalar::Scalar;

/// Keep the endpoints, then recursively keep the farthest point of each span
/// while it lies more than `epsilon` from the chord. Distances are measured
/// to the chord segment, so every dropped point ends up within `epsilon` of
/// the output polyline.
pub fn rdp_simplify<T: Scalar>(contour: &Contour<T>, epsilon: T) -> Result<Contour<T>> {
    if epsilon.is_nan() || epsilon < T::zero() {
        return Err(Error::contract(format!("rdp epsilon must be >= 0, got {epsilon}")));
    }
    let pts = &contour.points;
    if pts.len() <= 2 {
        return Ok(contour.clone());
    }
    let mut keep = vec![false; pts.len()];
    keep[0] = true;
    keep[pts.len() - 1] = true;

    let mut spans = vec![(0usize, pts.len() - 1)];
    while let Some((first, last)) = spans.pop() {
        if last <= first + 1 {
            continue;
        }
        let (mut worst, mut worst_dist) = (first, T::zero());
        for i in first + 1..last {
            let d = point_segment_distance(pts[i], pts[first], pts[last]);
            if d > worst_dist {
                worst = i;
                worst_dist = d;
            }
        }
        if worst_dist > epsilon {
            keep[worst] = true;
            spans.push((first, worst));
            spans.push((worst, last));
        }
    }

    Ok(Contour::new(
        pts.iter()
            .zip(&keep)
            .filter_map(|(p, &k)| k.then_some(*p))
            .collect(),
    ))
}
