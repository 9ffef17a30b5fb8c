//! Strictly convex polygons, the four-vertex window around an edge, random
//! generation and the half-plane oracle.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{orientation, point_on_segment, OrientationSign, Point, Segment, Tolerance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 vertices, got {found}")]
    TooFewVertices { found: usize },
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFinite { vertex: usize },
    #[error("vertex {vertex} duplicates its predecessor")]
    DuplicateVertex { vertex: usize },
    #[error("polygon is not strictly convex at vertex {vertex}")]
    NotConvex { vertex: usize },
    #[error("polygon boundary is not simple (winds more than once)")]
    NotSimple,
    #[error("edge index {index} out of range for a polygon with {len} edges")]
    IndexOutOfRange { index: usize, len: usize },
}

/// A validated, counter-clockwise, strictly convex vertex ring.
///
/// Edge `i` runs from vertex `i` to vertex `i + 1 (mod N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolygon", into = "RawPolygon")]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

/// On-disk shape: `{"vertices": [[x, y], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPolygon {
    pub vertices: Vec<[f64; 2]>,
}

impl TryFrom<RawPolygon> for ConvexPolygon {
    type Error = PolygonError;

    fn try_from(raw: RawPolygon) -> Result<Self, Self::Error> {
        let pts: Vec<Point> = raw.vertices.iter().map(|&[x, y]| Point { x, y }).collect();
        validate_convex(&pts, Tolerance::default())
    }
}

impl From<ConvexPolygon> for RawPolygon {
    fn from(poly: ConvexPolygon) -> Self {
        RawPolygon { vertices: poly.vertices.iter().map(|p| [p.x, p.y]).collect() }
    }
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Number of vertices, which is also the number of edges.
    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Always false; a validated polygon has at least three vertices.
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex `i mod N`.
    #[inline]
    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i % self.vertices.len()]
    }

    pub fn edge(&self, i: usize) -> Result<Segment, PolygonError> {
        self.check_index(i)?;
        Ok(Segment::unchecked(self.vertex(i), self.vertex(i + 1)))
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.len();
        (0..n).map(move |i| Segment::unchecked(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn check_index(&self, i: usize) -> Result<(), PolygonError> {
        if i < self.len() {
            Ok(())
        } else {
            Err(PolygonError::IndexOutOfRange { index: i, len: self.len() })
        }
    }

    /// The window `C, A, B, D = V[i-1], V[i], V[i+1], V[i+2]` around edge `i`.
    pub fn adjacent_quad(&self, i: usize) -> Result<Quad, PolygonError> {
        self.check_index(i)?;
        Ok(self.quad_unchecked(i))
    }

    #[inline]
    pub(crate) fn quad_unchecked(&self, i: usize) -> Quad {
        let n = self.len();
        Quad {
            c: self.vertices[(i + n - 1) % n],
            a: self.vertices[i],
            b: self.vertices[(i + 1) % n],
            d: self.vertices[(i + 2) % n],
            degenerate: n == 3,
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let first = self.vertices[0];
        let (min, max) = self.vertices.iter().fold((first, first), |(lo, hi), p| {
            (Point { x: lo.x.min(p.x), y: lo.y.min(p.y) }, Point { x: hi.x.max(p.x), y: hi.y.max(p.y) })
        });
        BoundingBox { min, max }
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        let n = self.len();
        // Work relative to V0 to keep the products small.
        let o = self.vertices[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 1..n - 1 {
            let p = self.vertices[i] - o;
            let q = self.vertices[i + 1] - o;
            let w = p.cross(q);
            a2 += w;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        o + Point { x: cx / (3.0 * a2), y: cy / (3.0 * a2) }
    }
}

/// Four consecutive vertices around edge `a b`; `c` and `d` are the far
/// endpoints of the two neighbouring edges. For a triangle `c == d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quad {
    pub c: Point,
    pub a: Point,
    pub b: Point,
    pub d: Point,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Inside,
    OnBoundary,
    Outside,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Inside => "inside",
            Classification::OnBoundary => "boundary",
            Classification::Outside => "outside",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let o = pts[0];
    (1..n.saturating_sub(1)).map(|i| (pts[i] - o).cross(pts[i + 1] - o)).sum::<f64>() * 0.5
}

/// Validate a vertex ring and normalise it to counter-clockwise order.
///
/// A clockwise ring is reversed in place around its first vertex, so `V0`
/// keeps its index. Every consecutive triple must then turn strictly left,
/// and the boundary must wind exactly once.
pub fn validate_convex(raw: &[Point], tol: Tolerance) -> Result<ConvexPolygon, PolygonError> {
    let n = raw.len();
    if n < 3 {
        return Err(PolygonError::TooFewVertices { found: n });
    }
    if let Some(vertex) = raw.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(PolygonError::NonFinite { vertex });
    }
    for i in 0..n {
        let prev = raw[(i + n - 1) % n];
        if raw[i].dist(prev) <= tol.eps() {
            return Err(PolygonError::DuplicateVertex { vertex: i });
        }
    }

    let mut vertices = raw.to_vec();
    let area = signed_area(&vertices);
    if area < 0.0 {
        vertices[1..].reverse();
    } else if area == 0.0 {
        return Err(PolygonError::NotConvex { vertex: 0 });
    }

    let mut turning = 0.0;
    for i in 0..n {
        let a = vertices[(i + n - 1) % n];
        let b = vertices[i];
        let c = vertices[(i + 1) % n];
        if orientation(a, b, c, tol) != OrientationSign::CounterClockwise {
            return Err(PolygonError::NotConvex { vertex: i });
        }
        let (e1, e2) = (b - a, c - b);
        turning += e1.cross(e2).atan2(e1.dot(e2));
    }
    // All turns are left, so the total is 2*pi for a convex ring and at
    // least 4*pi for one that winds several times.
    if turning > 3.0 * std::f64::consts::PI {
        return Err(PolygonError::NotSimple);
    }
    Ok(ConvexPolygon { vertices })
}

/// Exact half-plane classification. With [`Tolerance::EXACT`] on integer
/// coordinates (cross products below 2^53) the verdict is exact.
pub fn oracle_classify(poly: &ConvexPolygon, p: Point, tol: Tolerance) -> Classification {
    let mut on_edge = false;
    for edge in poly.edges() {
        match orientation(edge.p(), edge.q(), p, tol) {
            OrientationSign::CounterClockwise => {}
            OrientationSign::Clockwise => return Classification::Outside,
            // on a supporting line but past the edge's endpoints
            OrientationSign::Collinear if !point_on_segment(p, &edge, tol) => return Classification::Outside,
            OrientationSign::Collinear => on_edge = true,
        }
    }
    if on_edge {
        Classification::OnBoundary
    } else {
        Classification::Inside
    }
}

/// Smallest admissible angular gap between consecutive sampled angles.
pub const MIN_ANGLE_GAP: f64 = 1e-6;
/// Upper bound on the relative radial jitter applied to each vertex.
pub const MAX_RADIAL_JITTER: f64 = 0.05;
/// Uniform angle draws tried before falling back to one angle per slot.
const UNIFORM_ATTEMPTS: usize = 32;

/// A deterministic random strictly convex `n`-gon centred on the origin.
///
/// Angles are drawn uniformly on `[0, 2pi)` and sorted; vertices sit on the
/// circle of the given radius with a per-vertex radial jitter of at most
/// 5%. Jitter is dropped vertex by vertex wherever it would break strict
/// convexity. If uniform angles keep producing near-collinear triples the
/// sampler falls back to one uniform angle per `2pi/n` slot.
///
/// # Panics
///
/// If `n < 3`, if `radius` is not positive and finite, or if even a regular
/// `n`-gon of this radius has turns below the default tolerance.
pub fn random_convex(n: usize, seed: u64, radius: f64) -> ConvexPolygon {
    assert!(n >= 3, "a polygon needs at least 3 vertices, got {n}");
    assert!(radius.is_finite() && radius > 0.0, "radius must be positive, got {radius}");
    let tol = Tolerance::default();
    let edge = 2.0 * radius * (std::f64::consts::PI / n as f64).sin();
    let regular_turn = edge * edge * (TAU / n as f64).sin();
    assert!(regular_turn > 1e3 * tol.eps(), "radius {radius} is too small for a strictly convex {n}-gon");

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut attempt = 0;
    loop {
        let stratified = attempt >= UNIFORM_ATTEMPTS;
        attempt += 1;
        let angles = sample_angles(&mut rng, n, stratified);
        let gaps_ok =
            angles.windows(2).all(|w| w[1] - w[0] >= MIN_ANGLE_GAP) && angles[0] + TAU - angles[n - 1] >= MIN_ANGLE_GAP;
        if !gaps_ok {
            continue;
        }
        let jitter: Vec<f64> = (0..n).map(|_| rng.gen_range(-MAX_RADIAL_JITTER..=MAX_RADIAL_JITTER)).collect();
        if let Some(poly) = settle_jitter(&angles, jitter, radius, tol) {
            return poly;
        }
    }
}

fn sample_angles(rng: &mut Xoshiro256PlusPlus, n: usize, stratified: bool) -> Vec<f64> {
    if stratified {
        let slot = TAU / n as f64;
        (0..n).map(|i| slot * (i as f64 + rng.gen_range(0.25..0.75))).collect()
    } else {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        angles
    }
}

/// Zero the jitter around every failing turn until the ring is strictly
/// convex. Returns `None` if it still fails with no jitter left to remove.
fn settle_jitter(angles: &[f64], mut jitter: Vec<f64>, radius: f64, tol: Tolerance) -> Option<ConvexPolygon> {
    let n = angles.len();
    loop {
        let pts: Vec<Point> = angles
            .iter()
            .zip(&jitter)
            .map(|(&t, &j)| {
                let r = radius * (1.0 + j);
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let mut changed = false;
        let mut failed = false;
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            if orientation(pts[prev], pts[i], pts[next], tol) != OrientationSign::CounterClockwise {
                failed = true;
                for k in [prev, i, next] {
                    if jitter[k] != 0.0 {
                        jitter[k] = 0.0;
                        changed = true;
                    }
                }
            }
        }
        if !failed {
            return validate_convex(&pts, tol).ok();
        }
        if !changed {
            return None;
        }
    }
}

/// Largest radius for which integer vertices keep every cross product of
/// coordinates exactly representable.
pub const MAX_LATTICE_RADIUS: f64 = (1u64 << 24) as f64;

/// A random convex polygon with integer vertex coordinates.
///
/// Draws [`random_convex`] with the given radius and rounds every vertex.
/// Rounding can merge or flatten nearby vertices; the strict convex hull of
/// the rounded points is kept. A handful of derived seeds are tried to get
/// exactly `n` vertices, after which a hull with fewer vertices is accepted.
pub fn random_lattice_convex(n: usize, seed: u64, radius: f64) -> ConvexPolygon {
    assert!(radius <= MAX_LATTICE_RADIUS, "lattice radius {radius} exceeds {MAX_LATTICE_RADIUS}");
    let mut best: Option<ConvexPolygon> = None;
    for k in 0..16u64 {
        let sub_seed = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let rounded: Vec<Point> = random_convex(n, sub_seed, radius)
            .vertices()
            .iter()
            .map(|p| Point::new(p.x.round(), p.y.round()))
            .collect();
        let hull = strict_convex_hull(rounded);
        if hull.len() < 3 {
            continue;
        }
        let Ok(poly) = validate_convex(&hull, Tolerance::EXACT) else {
            continue;
        };
        if poly.len() == n {
            return poly;
        }
        if best.as_ref().is_none_or(|b| poly.len() > b.len()) {
            best = Some(poly);
        }
    }
    best.expect("rounding destroyed every candidate polygon; radius too small for n")
}

/// Andrew's monotone chain, dropping collinear points. Output is CCW.
fn strict_convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() + 1);
    for &p in pts.iter() {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}
