//! Point classification against a convex polygon.
//!
//! [`classify_improved`] is the perpendicular-legality method: for some edge
//! `A B` drop the perpendicular from the query point `P` to the edge's
//! supporting line, foot `G`. If `P G` misses the segment `C D` joining the
//! far endpoints of the two neighbouring edges, `P` is confined to the window
//! `C A B D` and that quadrilateral decides the answer. Edges are tried in a
//! policy-defined order; if none is legal the point is inside.
//!
//! [`classify_raycast`] and [`classify_fan_triangulation`] are the linear
//! baselines. All three share the same boundary semantics and report
//! [`TrialStats`] so that the amount of work can be compared.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::geom::{orientation, point_on_segment, segments_intersect, OrientationSign, Point, Segment, Tolerance};
use crate::polygon::{Classification, ConvexPolygon, PolygonError, Quad};

/// Seed used when a caller does not pick one.
pub const DEFAULT_POLICY_SEED: u64 = 0x00C0_FFEE_5EED;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialStats {
    /// Edges whose legality was tested (improved), or edges / fan triangles scanned.
    pub edges_tried: usize,
    /// Segment-intersection or crossing tests; for the fan baseline, orientation tests.
    pub intersection_tests: usize,
    /// The edge whose quadrilateral produced the verdict.
    pub legal_edge: Option<usize>,
    /// Every edge was illegal and the point was declared inside.
    pub exhausted_all: bool,
}

/// Order in which [`classify_improved`] visits edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeOrderPolicy {
    /// A uniformly random permutation determined by the seed.
    SeededShuffle(u64),
    /// `start, start + 1, ...` modulo `N`.
    Sequential(usize),
}

impl Default for EdgeOrderPolicy {
    fn default() -> Self {
        EdgeOrderPolicy::SeededShuffle(DEFAULT_POLICY_SEED)
    }
}

/// What makes a perpendicular legal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegalityRule {
    /// `P G` misses `C D`, and additionally the foot lies on the closed edge
    /// whenever `P` is strictly on the polygon's side of the edge line.
    #[default]
    Guarded,
    /// `P G` misses `C D`, nothing else. Wrong for points whose foot lands
    /// outside the edge while they sit inside the polygon beyond `C D`; see
    /// `counterexamples/` for minimized instances.
    Unguarded,
}

impl LegalityRule {
    pub fn as_str(self) -> &'static str {
        match self {
            LegalityRule::Guarded => "guarded",
            LegalityRule::Unguarded => "unguarded",
        }
    }
}

impl FromStr for LegalityRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "guarded" => Ok(LegalityRule::Guarded),
            "unguarded" => Ok(LegalityRule::Unguarded),
            other => Err(format!("unknown legality rule '{other}' (expected guarded|unguarded)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegalityOutcome {
    pub legal: bool,
    /// Foot of the perpendicular on the edge's supporting line.
    pub foot: Point,
    /// `P` lies on the supporting line, so `P G` collapsed to a point.
    pub zero_length: bool,
}

/// Reusable state for lazy Fisher-Yates shuffles.
///
/// Entries are versioned by a generation counter, so starting a new
/// permutation costs nothing and a walk of `k` edges touches `O(k)` memory.
#[derive(Debug, Default, Clone)]
pub struct ShuffleScratch {
    // High half: generation stamp. Low half: displaced edge index.
    slots: Vec<u64>,
    generation: u32,
}

impl ShuffleScratch {
    fn begin(&mut self, n: usize) {
        if self.slots.len() < n {
            self.slots.resize(n, 0);
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.slots.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
    }

    #[inline]
    fn get(&self, i: usize) -> u32 {
        let s = self.slots[i];
        let live = (s >> 32) as u32 == self.generation;
        // Branchless select; the stamp test is unpredictable mid-shuffle.
        let mask = (live as u32).wrapping_neg();
        (s as u32 & mask) | (i as u32 & !mask)
    }

    #[inline]
    fn set(&mut self, i: usize, v: u32) {
        self.slots[i] = (u64::from(self.generation) << 32) | u64::from(v);
    }
}

/// Iterator over edge indices `0..n` in policy order. Each edge appears once.
pub struct EdgeOrder<'s> {
    n: usize,
    k: usize,
    mode: OrderMode<'s>,
}

enum OrderMode<'s> {
    Sequential(usize),
    Shuffle(Xoshiro256PlusPlus, &'s mut ShuffleScratch),
}

pub fn edge_order(policy: EdgeOrderPolicy, n: usize, scratch: &mut ShuffleScratch) -> EdgeOrder<'_> {
    assert!(n <= u32::MAX as usize);
    let mode = match policy {
        EdgeOrderPolicy::Sequential(start) => OrderMode::Sequential(if n == 0 { 0 } else { start % n }),
        EdgeOrderPolicy::SeededShuffle(seed) => {
            scratch.begin(n);
            OrderMode::Shuffle(Xoshiro256PlusPlus::seed_from_u64(seed), scratch)
        }
    };
    EdgeOrder { n, k: 0, mode }
}

impl Iterator for EdgeOrder<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.k == self.n {
            return None;
        }
        let k = self.k;
        self.k += 1;
        Some(match &mut self.mode {
            OrderMode::Sequential(start) => {
                let i = *start + k;
                if i >= self.n {
                    i - self.n
                } else {
                    i
                }
            }
            OrderMode::Shuffle(rng, scratch) => {
                let j = k + bounded(rng, (self.n - k) as u32) as usize;
                let picked = scratch.get(j);
                let displaced = scratch.get(k);
                scratch.set(j, displaced);
                picked as usize
            }
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.n - self.k;
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for EdgeOrder<'_> {}

/// Uniform draw from `0..range` by multiply-shift with Lemire's rejection
/// step; divides only on the rare rejection path.
#[inline]
fn bounded(rng: &mut Xoshiro256PlusPlus, range: u32) -> u32 {
    let mut m = u64::from(rng.next_u32()) * u64::from(range);
    if (m as u32) < range {
        let threshold = range.wrapping_neg() % range;
        while (m as u32) < threshold {
            m = u64::from(rng.next_u32()) * u64::from(range);
        }
    }
    (m >> 32) as u32
}

#[inline(always)]
fn next_index(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}

#[inline(always)]
fn prev_index(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

/// The legality decision for edge `i`, without building the full outcome.
#[inline(always)]
fn edge_is_legal(v: &[Point], i: usize, p: Point, rule: LegalityRule, tol: Tolerance) -> bool {
    let n = v.len();
    let i1 = next_index(i, n);
    let a = v[i];
    let ab = v[i1] - a;
    let ap = p - a;
    let len_sq = ab.norm_sq();
    let t = ap.dot(ab);
    if rule == LegalityRule::Guarded && ab.cross(ap) > tol.eps() && (t < 0.0 || t > len_sq) {
        return false;
    }
    let foot = a + ab * (t / len_sq);
    let c = v[prev_index(i, n)];
    let d = v[next_index(i1, n)];
    !segments_intersect(&perpendicular(p, foot, tol), &Segment::unchecked(c, d), tol)
}

#[inline(always)]
fn perpendicular(p: Point, foot: Point, tol: Tolerance) -> Segment {
    if (p - foot).norm_sq() <= tol.eps() * tol.eps() {
        Segment::zero_length(p)
    } else {
        Segment::unchecked(p, foot)
    }
}

/// Legality of the perpendicular from `p` to edge `i` under the default rule.
pub fn legality_test(
    poly: &ConvexPolygon,
    i: usize,
    p: Point,
    tol: Tolerance,
) -> Result<LegalityOutcome, PolygonError> {
    legality_test_with(poly, i, p, LegalityRule::default(), tol)
}

pub fn legality_test_with(
    poly: &ConvexPolygon,
    i: usize,
    p: Point,
    rule: LegalityRule,
    tol: Tolerance,
) -> Result<LegalityOutcome, PolygonError> {
    poly.check_index(i)?;
    let v = poly.vertices();
    let (a, b) = (v[i], v[next_index(i, v.len())]);
    let ab = b - a;
    let foot = a + ab * ((p - a).dot(ab) / ab.norm_sq());
    Ok(LegalityOutcome {
        legal: edge_is_legal(v, i, p, rule, tol),
        foot,
        zero_length: perpendicular(p, foot, tol).is_degenerate(),
    })
}

/// Number of polygon edges the quadrilateral ray cast walks.
#[inline]
fn quad_ring_len(quad: &Quad) -> usize {
    if quad.degenerate {
        3
    } else {
        4
    }
}

/// Classify `p` against the window `C A B D`, answering for the whole
/// polygon the window came from.
///
/// Points on `C A`, `A B` or `B D` are on the polygon boundary. The closing
/// side `D C` is a chord of the polygon when it has five or more vertices,
/// so points on it are inside; for a quadrilateral it is a real edge. A
/// triangle's window has `C == D` and is the triangle `C A B`.
pub fn classify_quad(quad: &Quad, p: Point, n_polygon: usize, tol: Tolerance) -> Classification {
    let (c, a, b, d) = (quad.c, quad.a, quad.b, quad.d);
    let on = |s: Point, e: Point| point_on_segment(p, &Segment::unchecked(s, e), tol);
    if on(c, a) || on(a, b) || on(b, d) {
        return Classification::OnBoundary;
    }
    if !quad.degenerate && on(d, c) {
        return if n_polygon >= 5 { Classification::Inside } else { Classification::OnBoundary };
    }
    let ring = [c, a, b, d];
    if crossing_parity(&ring[..quad_ring_len(quad)], p) {
        Classification::Inside
    } else {
        Classification::Outside
    }
}

/// Even-odd parity of a rightward horizontal ray. An edge counts iff exactly
/// one endpoint lies strictly above `p` and the crossing is right of `p`.
#[inline]
fn crossing_parity(ring: &[Point], p: Point) -> bool {
    let mut inside = false;
    let mut a = ring[ring.len() - 1];
    for &b in ring {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                inside = !inside;
            }
        }
        a = b;
    }
    inside
}

thread_local! {
    static SCRATCH: RefCell<ShuffleScratch> = RefCell::new(ShuffleScratch::default());
}

/// The perpendicular-legality classifier under the default legality rule.
pub fn classify_improved(
    poly: &ConvexPolygon,
    p: Point,
    policy: EdgeOrderPolicy,
    tol: Tolerance,
) -> (Classification, TrialStats) {
    classify_improved_with(poly, p, policy, LegalityRule::default(), tol)
}

pub fn classify_improved_with(
    poly: &ConvexPolygon,
    p: Point,
    policy: EdgeOrderPolicy,
    rule: LegalityRule,
    tol: Tolerance,
) -> (Classification, TrialStats) {
    SCRATCH.with(|s| classify_improved_in(poly, p, policy, rule, tol, &mut s.borrow_mut()))
}

/// As [`classify_improved_with`], with caller-owned shuffle scratch.
pub fn classify_improved_in(
    poly: &ConvexPolygon,
    p: Point,
    policy: EdgeOrderPolicy,
    rule: LegalityRule,
    tol: Tolerance,
    scratch: &mut ShuffleScratch,
) -> (Classification, TrialStats) {
    let v = poly.vertices();
    let n = v.len();
    let mut stats = TrialStats::default();
    let mut found = None;
    match policy {
        // Plain index walk; avoids the iterator in the hot loop.
        EdgeOrderPolicy::Sequential(start) => {
            let start = start % n;
            for i in (start..n).chain(0..start) {
                stats.edges_tried += 1;
                if edge_is_legal(v, i, p, rule, tol) {
                    found = Some(i);
                    break;
                }
            }
        }
        EdgeOrderPolicy::SeededShuffle(_) => {
            for i in edge_order(policy, n, scratch) {
                stats.edges_tried += 1;
                if edge_is_legal(v, i, p, rule, tol) {
                    found = Some(i);
                    break;
                }
            }
        }
    }
    stats.intersection_tests = stats.edges_tried;
    if let Some(i) = found {
        let quad = poly.quad_unchecked(i);
        stats.legal_edge = Some(i);
        stats.intersection_tests += quad_ring_len(&quad);
        return (classify_quad(&quad, p, n, tol), stats);
    }
    stats.exhausted_all = true;
    (Classification::Inside, stats)
}

#[inline]
fn on_boundary(v: &[Point], p: Point, tol: Tolerance) -> bool {
    let mut a = v[v.len() - 1];
    for &b in v {
        if point_on_segment(p, &Segment::unchecked(a, b), tol) {
            return true;
        }
        a = b;
    }
    false
}

/// Even-odd ray casting over every edge, after a boundary scan.
pub fn classify_raycast(poly: &ConvexPolygon, p: Point, tol: Tolerance) -> (Classification, TrialStats) {
    let v = poly.vertices();
    let n = v.len();
    let stats = TrialStats { edges_tried: n, intersection_tests: n, legal_edge: None, exhausted_all: false };
    if on_boundary(v, p, tol) {
        return (Classification::OnBoundary, stats);
    }
    let verdict = if crossing_parity(v, p) { Classification::Inside } else { Classification::Outside };
    (verdict, stats)
}

/// Linear scan of the fan triangles `(V0, Vi, Vi+1)`, after a boundary scan.
///
/// Once boundary points are excluded, lying in a closed fan triangle (its
/// interior or an internal diagonal) means inside.
pub fn classify_fan_triangulation(poly: &ConvexPolygon, p: Point, tol: Tolerance) -> (Classification, TrialStats) {
    use OrientationSign::Clockwise;

    let v = poly.vertices();
    let n = v.len();
    let mut stats = TrialStats::default();
    if on_boundary(v, p, tol) {
        stats.edges_tried = n;
        return (Classification::OnBoundary, stats);
    }
    let o = v[0];
    let mut left = orientation(o, v[1], p, tol);
    stats.intersection_tests = 1;
    for i in 1..n - 1 {
        stats.edges_tried += 1;
        stats.intersection_tests += 2;
        let outer = orientation(v[i], v[i + 1], p, tol);
        let right = orientation(o, v[i + 1], p, tol);
        if left != Clockwise && outer != Clockwise && right.reversed() != Clockwise {
            return (Classification::Inside, stats);
        }
        left = right;
    }
    (Classification::Outside, stats)
}

/// Number of edges with a legal perpendicular from `p`, in `0..=N`.
pub fn sigma(poly: &ConvexPolygon, p: Point, tol: Tolerance) -> usize {
    sigma_with(poly, p, LegalityRule::default(), tol)
}

pub fn sigma_with(poly: &ConvexPolygon, p: Point, rule: LegalityRule, tol: Tolerance) -> usize {
    legal_edges(poly, p, rule, tol).count()
}

/// Indices of every edge with a legal perpendicular from `p`.
pub fn legal_edges<'a>(
    poly: &'a ConvexPolygon,
    p: Point,
    rule: LegalityRule,
    tol: Tolerance,
) -> impl Iterator<Item = usize> + 'a {
    let v = poly.vertices();
    (0..v.len()).filter(move |&i| edge_is_legal(v, i, p, rule, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Improved,
    Raycast,
    Fan,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Improved, Algorithm::Raycast, Algorithm::Fan];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Improved => "improved",
            Algorithm::Raycast => "raycast",
            Algorithm::Fan => "fan",
        }
    }

    /// `policy` and `rule` only matter for [`Algorithm::Improved`].
    pub fn classify(
        self,
        poly: &ConvexPolygon,
        p: Point,
        policy: EdgeOrderPolicy,
        rule: LegalityRule,
        tol: Tolerance,
    ) -> (Classification, TrialStats) {
        match self {
            Algorithm::Improved => classify_improved_with(poly, p, policy, rule, tol),
            Algorithm::Raycast => classify_raycast(poly, p, tol),
            Algorithm::Fan => classify_fan_triangulation(poly, p, tol),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "improved" => Ok(Algorithm::Improved),
            "raycast" => Ok(Algorithm::Raycast),
            "fan" => Ok(Algorithm::Fan),
            other => Err(format!("unknown algorithm '{other}' (expected improved|raycast|fan)")),
        }
    }
}

/// One trial of the improved method, for visualisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub edge: usize,
    pub foot: Point,
    pub legal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub verdict: Classification,
    pub steps: Vec<TraceStep>,
    /// Window of the first legal edge, if any.
    pub quad: Option<Quad>,
}

/// [`classify_improved_with`] recording every perpendicular it tries.
pub fn trace_improved(
    poly: &ConvexPolygon,
    p: Point,
    policy: EdgeOrderPolicy,
    rule: LegalityRule,
    tol: Tolerance,
) -> Trace {
    let mut scratch = ShuffleScratch::default();
    let mut steps = Vec::new();
    for i in edge_order(policy, poly.len(), &mut scratch) {
        let out = legality_test_with(poly, i, p, rule, tol).expect("edge index from edge_order");
        steps.push(TraceStep { edge: i, foot: out.foot, legal: out.legal });
        if out.legal {
            let quad = poly.quad_unchecked(i);
            return Trace { verdict: classify_quad(&quad, p, poly.len(), tol), steps, quad: Some(quad) };
        }
    }
    Trace { verdict: Classification::Inside, steps, quad: None }
}
