//! Planar primitives and predicates.
//!
//! Everything here runs in `f64` with a single absolute [`Tolerance`]. Cross
//! products are compared against `eps` directly; distances (point to line,
//! point to segment) are compared against `eps` in model units.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("edge endpoints coincide")]
    DegenerateEdge,
    #[error("lines are parallel")]
    Parallel,
    #[error("reference point lies on its line")]
    InvalidReference,
}

/// A point (or free vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    /// Panics on non-finite input; use [`Point::try_new`] for untrusted data.
    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        assert!(x.is_finite() && y.is_finite(), "non-finite point ({x}, {y})");
        Point { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self, GeomError> {
        if x.is_finite() && y.is_finite() {
            Ok(Point { x, y })
        } else {
            Err(GeomError::NonFinite)
        }
    }

    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn midpoint(self, other: Point) -> Point {
        Point { x: 0.5 * (self.x + other.x), y: 0.5 * (self.y + other.y) }
    }

    /// `self + t * (other - self)`.
    #[inline]
    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point { x: self.x + o.x, y: self.y + o.y }
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point { x: self.x - o.x, y: self.y - o.y }
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point { x: self.x * s, y: self.y * s }
    }
}

/// Absolute comparison threshold shared by every predicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    eps: f64,
}

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    /// Zero tolerance. Exact on integer inputs whose cross products stay below 2^53.
    pub const EXACT: Tolerance = Tolerance { eps: 0.0 };

    pub fn new(eps: f64) -> Option<Self> {
        (eps.is_finite() && eps >= 0.0).then_some(Tolerance { eps })
    }

    #[inline]
    pub fn eps(self) -> f64 {
        self.eps
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: Self::DEFAULT_EPS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrientationSign {
    CounterClockwise,
    Clockwise,
    Collinear,
}

impl OrientationSign {
    #[inline]
    fn from_value(v: f64, eps: f64) -> Self {
        if v > eps {
            OrientationSign::CounterClockwise
        } else if v < -eps {
            OrientationSign::Clockwise
        } else {
            OrientationSign::Collinear
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            OrientationSign::CounterClockwise => OrientationSign::Clockwise,
            OrientationSign::Clockwise => OrientationSign::CounterClockwise,
            OrientationSign::Collinear => OrientationSign::Collinear,
        }
    }
}

/// A line in point-direction form: all `base + t * (dir_u, dir_v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirLine {
    base: Point,
    dir_u: f64,
    dir_v: f64,
}

impl DirLine {
    pub fn new(base: Point, dir_u: f64, dir_v: f64) -> Result<Self, GeomError> {
        if !(dir_u.is_finite() && dir_v.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        if dir_u == 0.0 && dir_v == 0.0 {
            return Err(GeomError::ZeroDirection);
        }
        Ok(DirLine { base, dir_u, dir_v })
    }

    /// The line through `a` and `b`, directed from `a` to `b`.
    pub fn through(a: Point, b: Point) -> Result<Self, GeomError> {
        Self::new(a, b.x - a.x, b.y - a.y)
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn dir(&self) -> Point {
        Point { x: self.dir_u, y: self.dir_v }
    }

    pub fn dir_u(&self) -> f64 {
        self.dir_u
    }

    pub fn dir_v(&self) -> f64 {
        self.dir_v
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.base + self.dir() * t
    }
}

/// A closed line segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    p: Point,
    q: Point,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Result<Self, GeomError> {
        if p == q {
            Err(GeomError::DegenerateSegment)
        } else {
            Ok(Segment { p, q })
        }
    }

    /// A segment collapsed to a single point. Only the zero-length
    /// perpendicular (query point lying on the edge's line) uses this.
    pub fn zero_length(p: Point) -> Self {
        Segment { p, q: p }
    }

    /// Accepts `p == q` without complaint; for internal callers that have
    /// already decided a degenerate segment is meaningful.
    #[inline]
    pub(crate) fn unchecked(p: Point, q: Point) -> Self {
        Segment { p, q }
    }

    pub fn p(&self) -> Point {
        self.p
    }

    pub fn q(&self) -> Point {
        self.q
    }

    pub fn is_degenerate(&self) -> bool {
        self.p == self.q
    }
}

#[inline]
pub fn orientation(a: Point, b: Point, c: Point, tol: Tolerance) -> OrientationSign {
    OrientationSign::from_value((b - a).cross(c - a), tol.eps)
}

/// Intersection of two lines. The denominator is `v2*u1 - v1*u2`; lines whose
/// denominator is within `eps` of zero (including coincident lines) are
/// reported as [`GeomError::Parallel`].
pub fn line_intersection(l1: &DirLine, l2: &DirLine, tol: Tolerance) -> Result<Point, GeomError> {
    let denom = l2.dir_v * l1.dir_u - l1.dir_v * l2.dir_u;
    if denom.abs() <= tol.eps {
        return Err(GeomError::Parallel);
    }
    // l1.base + t * d1 = l2.base + s * d2, solved for t by Cramer's rule.
    let t = (l2.base - l1.base).cross(l2.dir()) / l1.dir().cross(l2.dir());
    Ok(l1.point_at(t))
}

/// Orthogonal projection of `p` onto the supporting line of `a b`. The foot
/// is never clamped to the segment.
#[inline]
pub fn perpendicular_foot(p: Point, a: Point, b: Point) -> Result<Point, GeomError> {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return Err(GeomError::DegenerateEdge);
    }
    Ok(a + ab * ((p - a).dot(ab) / len_sq))
}

/// `p` lies within the axis-aligned box of `s`, inflated by `eps`.
#[inline]
fn in_box(p: Point, s: &Segment, eps: f64) -> bool {
    p.x >= s.p.x.min(s.q.x) - eps
        && p.x <= s.p.x.max(s.q.x) + eps
        && p.y >= s.p.y.min(s.q.y) - eps
        && p.y <= s.p.y.max(s.q.y) + eps
}

/// Closed-segment intersection: touching endpoints and collinear overlap
/// both count. A zero-length `s1` intersects `s2` iff its point lies on `s2`.
#[inline]
pub fn segments_intersect(s1: &Segment, s2: &Segment, tol: Tolerance) -> bool {
    use OrientationSign::Collinear;

    let o1 = orientation(s1.p, s1.q, s2.p, tol);
    let o2 = orientation(s1.p, s1.q, s2.q, tol);
    let o3 = orientation(s2.p, s2.q, s1.p, tol);
    let o4 = orientation(s2.p, s2.q, s1.q, tol);

    // A zero-length segment is Collinear against everything, so it always
    // falls through to the on-segment checks below.
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == Collinear && point_on_segment(s2.p, s1, tol))
        || (o2 == Collinear && point_on_segment(s2.q, s1, tol))
        || (o3 == Collinear && point_on_segment(s1.p, s2, tol))
        || (o4 == Collinear && point_on_segment(s1.q, s2, tol))
}

/// True iff `p` is within `eps` of the closed segment `s`.
#[inline]
pub fn point_on_segment(p: Point, s: &Segment, tol: Tolerance) -> bool {
    let eps = tol.eps;
    if !in_box(p, s, eps) {
        return false;
    }
    let d = s.q - s.p;
    let len_sq = d.norm_sq();
    let ap = p - s.p;
    if len_sq == 0.0 {
        return ap.norm_sq() <= eps * eps;
    }
    let cross = d.cross(ap);
    if cross * cross > eps * eps * len_sq {
        return false;
    }
    // Within eps of the supporting line and of the box; check the projection
    // parameter so long thin boxes do not admit points past the endpoints.
    let t = ap.dot(d);
    if t < 0.0 {
        return ap.norm_sq() <= eps * eps;
    }
    if t > len_sq {
        return (p - s.q).norm_sq() <= eps * eps;
    }
    true
}

/// Which side of `l` the point is on, judged by distance to the line.
pub fn side_of_line(p: Point, l: &DirLine, tol: Tolerance) -> OrientationSign {
    let d = l.dir();
    let cross = d.cross(p - l.base);
    if cross * cross <= tol.eps * tol.eps * d.norm_sq() {
        OrientationSign::Collinear
    } else if cross > 0.0 {
        OrientationSign::CounterClockwise
    } else {
        OrientationSign::Clockwise
    }
}

/// Closed region bounded by two lines: the half-plane of `l1` holding `ref1`
/// intersected with the half-plane of `l2` holding `ref2`.
pub fn band_contains(
    p: Point,
    l1: &DirLine,
    l2: &DirLine,
    ref1: Point,
    ref2: Point,
    tol: Tolerance,
) -> Result<bool, GeomError> {
    let side1 = side_of_line(ref1, l1, tol);
    let side2 = side_of_line(ref2, l2, tol);
    if side1 == OrientationSign::Collinear || side2 == OrientationSign::Collinear {
        return Err(GeomError::InvalidReference);
    }
    let in_half = |side: OrientationSign, want: OrientationSign| side == OrientationSign::Collinear || side == want;
    Ok(in_half(side_of_line(p, l1, tol), side1) && in_half(side_of_line(p, l2, tol), side2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use OrientationSign::*;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn seg(a: (f64, f64), b: (f64, f64)) -> Segment {
        Segment::new(pt(a.0, a.1), pt(b.0, b.1)).unwrap()
    }

    fn close(a: Point, b: Point) -> bool {
        a.dist(b) < 1e-12
    }

    #[test]
    fn orientation_examples() {
        let tol = Tolerance::default();
        assert_eq!(orientation(pt(0., 0.), pt(1., 0.), pt(0., 1.), tol), CounterClockwise);
        assert_eq!(orientation(pt(0., 0.), pt(1., 1.), pt(2., 2.), tol), Collinear);
        assert_eq!(orientation(pt(0., 0.), pt(0., 1.), pt(1., 1.), tol), Clockwise);
    }

    #[test]
    fn line_intersection_examples() {
        let tol = Tolerance::default();
        let diag = DirLine::new(pt(0., 0.), 1., 1.).unwrap();
        let horiz = DirLine::new(pt(0., 1.), 1., 0.).unwrap();
        // x = y and y = 1 meet at (1, 1).
        assert!(close(line_intersection(&diag, &horiz, tol).unwrap(), pt(1., 1.)));

        let x_axis = DirLine::new(pt(0., 0.), 1., 0.).unwrap();
        let y_axis = DirLine::new(pt(0., 0.), 0., 1.).unwrap();
        assert!(close(line_intersection(&x_axis, &y_axis, tol).unwrap(), pt(0., 0.)));

        let par = DirLine::new(pt(0., 1.), 2., 2.).unwrap();
        assert_eq!(line_intersection(&diag, &par, tol), Err(GeomError::Parallel));
        // coincident lines are parallel too
        let same = DirLine::new(pt(3., 3.), -1., -1.).unwrap();
        assert_eq!(line_intersection(&diag, &same, tol), Err(GeomError::Parallel));
    }

    #[test]
    fn perpendicular_foot_examples() {
        assert_eq!(perpendicular_foot(pt(0., 1.), pt(-1., 0.), pt(1., 0.)).unwrap(), pt(0., 0.));
        // outside the segment: stays on the supporting line
        assert_eq!(perpendicular_foot(pt(5., 5.), pt(0., 0.), pt(1., 0.)).unwrap(), pt(5., 0.));
        assert_eq!(perpendicular_foot(pt(0.3, 0.), pt(0., 0.), pt(1., 0.)).unwrap(), pt(0.3, 0.));
        assert_eq!(perpendicular_foot(pt(1., 1.), pt(2., 2.), pt(2., 2.)), Err(GeomError::DegenerateEdge));
    }

    #[test]
    fn segments_intersect_examples() {
        let tol = Tolerance::default();
        assert!(segments_intersect(&seg((0., 0.), (2., 2.)), &seg((0., 2.), (2., 0.)), tol));
        assert!(!segments_intersect(&seg((0., 0.), (1., 0.)), &seg((0., 1.), (1., 1.)), tol));
        assert!(segments_intersect(&seg((0., 0.), (1., 0.)), &seg((1., 0.), (2., 1.)), tol));
    }

    #[test]
    fn segments_intersect_collinear_and_degenerate() {
        let tol = Tolerance::default();
        // overlapping collinear
        assert!(segments_intersect(&seg((0., 0.), (2., 0.)), &seg((1., 0.), (3., 0.)), tol));
        // collinear but disjoint
        assert!(!segments_intersect(&seg((0., 0.), (1., 0.)), &seg((2., 0.), (3., 0.)), tol));
        // T-junction: endpoint of one in the interior of the other
        assert!(segments_intersect(&seg((0., 0.), (2., 0.)), &seg((1., 0.), (1., 5.)), tol));

        let on = Segment::zero_length(pt(0.5, 0.));
        let off = Segment::zero_length(pt(0.5, 0.1));
        let s = seg((0., 0.), (1., 0.));
        assert!(segments_intersect(&on, &s, tol));
        assert!(segments_intersect(&s, &on, tol));
        assert!(!segments_intersect(&off, &s, tol));
        assert!(!segments_intersect(&s, &off, tol));
        // a zero-length segment on the supporting line but past the end
        assert!(!segments_intersect(&Segment::zero_length(pt(2., 0.)), &s, tol));
    }

    #[test]
    fn segment_constructor_rejects_degenerate() {
        assert_eq!(Segment::new(pt(1., 1.), pt(1., 1.)), Err(GeomError::DegenerateSegment));
        assert!(Segment::zero_length(pt(1., 1.)).is_degenerate());
    }

    #[test]
    fn point_on_segment_examples() {
        let tol = Tolerance::default();
        let s = seg((0., 0.), (1., 0.));
        assert!(point_on_segment(pt(0.5, 0.), &s, tol));
        assert!(point_on_segment(pt(1., 0.), &s, tol));
        assert!(!point_on_segment(pt(2., 0.), &s, tol));
        assert!(!point_on_segment(pt(0.5, 1e-6), &s, tol));
        assert!(point_on_segment(pt(0.5, 1e-10), &s, tol));
    }

    #[test]
    fn side_of_line_examples() {
        let tol = Tolerance::default();
        let l = DirLine::new(pt(0., 0.), 1., 0.).unwrap();
        assert_eq!(side_of_line(pt(0., 1.), &l, tol), CounterClockwise);
        assert_eq!(side_of_line(pt(0., -1.), &l, tol), Clockwise);
        assert_eq!(side_of_line(pt(3., 0.), &l, tol), Collinear);
    }

    #[test]
    fn band_contains_examples() {
        let tol = Tolerance::default();
        let l1 = DirLine::new(pt(0., 0.), 1., 0.).unwrap();
        let l2 = DirLine::new(pt(0., 0.), 0., 1.).unwrap();
        let (r1, r2) = (pt(0., 1.), pt(1., 0.));
        assert_eq!(band_contains(pt(1., 1.), &l1, &l2, r1, r2, tol), Ok(true));
        assert_eq!(band_contains(pt(-1., 1.), &l1, &l2, r1, r2, tol), Ok(false));
        assert_eq!(band_contains(pt(0., 0.5), &l1, &l2, r1, r2, tol), Ok(true));
        assert_eq!(band_contains(pt(1., 1.), &l1, &l2, pt(4., 0.), r2, tol), Err(GeomError::InvalidReference));
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert_eq!(Point::try_new(f64::NAN, 0.), Err(GeomError::NonFinite));
        assert_eq!(Point::try_new(0., f64::INFINITY), Err(GeomError::NonFinite));
        assert_eq!(DirLine::new(pt(0., 0.), 0., 0.), Err(GeomError::ZeroDirection));
        assert!(Tolerance::new(-1.0).is_none());
        assert_eq!(Tolerance::default().eps(), 1e-9);
    }
}
