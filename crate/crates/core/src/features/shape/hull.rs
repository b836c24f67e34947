//! Gift wrapping (Jarvis march) convex hull.

use crate::error::{Error, Result};
use crate::geometry::{cross, Contour, Point2};
use crate::scalar::Scalar;

/// Hull vertices in counter-clockwise order (positive orientation of
/// [`cross`]), starting from the lowest-then-leftmost point. Points lying on
/// a hull edge are not vertices.
pub fn convex_hull<T: Scalar>(points: &[Point2<T>]) -> Result<Contour<T>> {
    let start = *points
        .iter()
        .min_by(|a, b| {
            a.y.partial_cmp(&b.y)
                .unwrap()
                .then(a.x.partial_cmp(&b.x).unwrap())
        })
        .ok_or(Error::DegenerateHull)?;

    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut candidate = match points.iter().find(|&&p| p != current) {
            Some(&p) => p,
            None => return Err(Error::DegenerateHull),
        };
        for &r in points {
            if r == current {
                continue;
            }
            let turn = cross(current, candidate, r);
            if turn < T::zero()
                || (turn == T::zero()
                    && current.distance_sqr(r) > current.distance_sqr(candidate))
            {
                candidate = r;
            }
        }
        if candidate == start {
            break;
        }
        if hull.len() > points.len() {
            return Err(Error::Invariant("gift wrapping failed to close".into()));
        }
        hull.push(candidate);
        current = candidate;
    }

    if hull.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    Ok(Contour::new(hull))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2<f64>> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn triangle_is_its_own_hull() {
        let tri = pts(&[(2., 3.), (0., 0.), (4., 0.)]);
        let hull = convex_hull(&tri).unwrap();
        assert_eq!(hull.points, pts(&[(0., 0.), (4., 0.), (2., 3.)]));
    }

    #[test]
    fn interior_point_dropped() {
        let sq = pts(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.), (0.5, 0.5)]);
        let hull = convex_hull(&sq).unwrap();
        assert_eq!(hull.points, pts(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]));
    }

    #[test]
    fn edge_points_excluded() {
        let sq = pts(&[(0., 0.), (2., 0.), (1., 0.), (2., 2.), (2., 1.), (0., 2.), (1., 2.), (0., 1.)]);
        assert_eq!(convex_hull(&sq).unwrap().len(), 4);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(convex_hull::<f64>(&[]), Err(Error::DegenerateHull)));
        assert!(matches!(convex_hull(&pts(&[(0., 0.), (1., 1.)])), Err(Error::DegenerateHull)));
        assert!(matches!(
            convex_hull(&pts(&[(0., 0.), (1., 1.), (2., 2.), (3., 3.)])),
            Err(Error::DegenerateHull)
        ));
        assert!(matches!(convex_hull(&pts(&[(1., 1.); 5])), Err(Error::DegenerateHull)));
    }

    #[test]
    fn duplicates_tolerated() {
        let p = pts(&[(0., 0.), (0., 0.), (3., 0.), (3., 0.), (0., 3.), (1., 1.)]);
        assert_eq!(convex_hull(&p).unwrap().points, pts(&[(0., 0.), (3., 0.), (0., 3.)]));
    }
}
