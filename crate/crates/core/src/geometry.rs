//! Planar points and polylines.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T> Point2<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }
}

impl Point2<i32> {
    pub fn cast<T: Scalar>(self) -> Point2<T> {
        Point2::new(T::from_i32(self.x).unwrap(), T::from_i32(self.y).unwrap())
    }
}

impl<T: Scalar> Point2<T> {
    pub fn distance(self, other: Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sqr(self, other: Self) -> T {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }
}

/// Twice the signed area of (a, b, c); positive when c lies left of a -> b.
#[inline]
pub fn cross<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == T::zero() {
        return p.distance(a);
    }
    let t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    let t = t.max(T::zero()).min(T::one());
    p.distance(Point2::new(a.x + t * dx, a.y + t * dy))
}

/// Ordered list of points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Contour<T> {
    pub points: Vec<Point2<T>>,
}

impl<T> Contour<T> {
    pub fn new(points: Vec<Point2<T>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Contour<i32> {
    pub fn cast<T: Scalar>(&self) -> Contour<T> {
        Contour::new(self.points.iter().map(|p| p.cast()).collect())
    }
}

impl<T: Scalar> Contour<T> {
    /// Distance from `p` to the nearest segment of this polyline.
    pub fn distance_to(&self, p: Point2<T>) -> T {
        match self.points.as_slice() {
            [] => T::infinity(),
            [only] => p.distance(*only),
            pts => pts
                .windows(2)
                .map(|w| point_segment_distance(p, w[0], w[1]))
                .fold(T::infinity(), T::min),
        }
    }
}
