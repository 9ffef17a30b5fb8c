//! Differential testing of the three classifiers against the exact oracle.
//!
//! Polygons have integer vertices and query points sit on the integer
//! lattice inside the bounding box, so [`oracle_classify`] with
//! [`Tolerance::EXACT`] is ground truth. Points on the boundary are
//! resampled; the boundary is covered by its own tests.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify_fan_triangulation, classify_improved_with, classify_quad, classify_raycast, legal_edges,
    legality_test_with, EdgeOrderPolicy, LegalityRule,
};
use crate::geom::{Point, Segment, Tolerance};
use crate::polygon::{oracle_classify, random_lattice_convex, validate_convex, Classification, ConvexPolygon};

pub const DEFAULT_FUZZ_SEED: u64 = 20_240_601;
pub const DEFAULT_LATTICE_RADIUS: f64 = (1u64 << 22) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub cases: usize,
    /// Vertex counts are drawn uniformly from `3..=max_n`.
    pub max_n: usize,
    pub seed: u64,
    pub radius: f64,
    pub rule: LegalityRule,
    /// Minimum distance between a query point and every edge.
    pub clearance: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            cases: 100_000,
            max_n: 256,
            seed: DEFAULT_FUZZ_SEED,
            radius: DEFAULT_LATTICE_RADIUS,
            rule: LegalityRule::Guarded,
            clearance: 10.0 * Tolerance::DEFAULT_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzCase {
    pub index: usize,
    pub polygon: ConvexPolygon,
    pub point: Point,
    pub policy: EdgeOrderPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub improved: Classification,
    pub raycast: Classification,
    pub fan: Classification,
    pub oracle: Classification,
}

impl Verdicts {
    pub fn agree(&self) -> bool {
        self.improved == self.oracle && self.raycast == self.oracle && self.fan == self.oracle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub case: FuzzCase,
    pub verdicts: Verdicts,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub cases: usize,
    pub agree: usize,
    /// Cases where the improved method found no legal edge.
    pub exhausted_all: usize,
    pub inside: usize,
    pub outside: usize,
    pub disagreements: Vec<Disagreement>,
}

impl FuzzSummary {
    pub fn disagreement_count(&self) -> usize {
        self.cases - self.agree
    }
}

/// Build case `index` of the stream defined by `cfg`. Cases are independent
/// of each other, so any one can be regenerated on its own.
pub fn make_case(cfg: &FuzzConfig, index: usize) -> FuzzCase {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed ^ (index as u64).wrapping_mul(0xA24B_AED4_963E_E407));
    let n = rng.gen_range(3..=cfg.max_n);
    let polygon = random_lattice_convex(n, rng.gen(), cfg.radius);
    let bb = polygon.bounding_box();
    let point = loop {
        let p = Point::new(
            rng.gen_range(bb.min.x as i64..=bb.max.x as i64) as f64,
            rng.gen_range(bb.min.y as i64..=bb.max.y as i64) as f64,
        );
        if clear_of_boundary(&polygon, p, cfg.clearance) {
            break p;
        }
    };
    FuzzCase { index, polygon, point, policy: EdgeOrderPolicy::SeededShuffle(rng.gen()) }
}

fn clear_of_boundary(poly: &ConvexPolygon, p: Point, clearance: f64) -> bool {
    poly.edges().all(|e| segment_distance(p, &e) > clearance)
}

fn segment_distance(p: Point, s: &Segment) -> f64 {
    let d = s.q() - s.p();
    let t = ((p - s.p()).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
    p.dist(s.p().lerp(s.q(), t))
}

pub fn evaluate(case: &FuzzCase, rule: LegalityRule) -> Verdicts {
    let tol = Tolerance::default();
    let (poly, p) = (&case.polygon, case.point);
    Verdicts {
        improved: classify_improved_with(poly, p, case.policy, rule, tol).0,
        raycast: classify_raycast(poly, p, tol).0,
        fan: classify_fan_triangulation(poly, p, tol).0,
        oracle: oracle_classify(poly, p, Tolerance::EXACT),
    }
}

/// Run the differential suite. At most `keep` disagreements are retained.
pub fn run_fuzz(cfg: &FuzzConfig, keep: usize) -> FuzzSummary {
    let tol = Tolerance::default();
    let mut summary = FuzzSummary::default();
    for index in 0..cfg.cases {
        let case = make_case(cfg, index);
        let verdicts = evaluate(&case, cfg.rule);
        summary.cases += 1;
        match verdicts.oracle {
            Classification::Inside => summary.inside += 1,
            Classification::Outside => summary.outside += 1,
            Classification::OnBoundary => {}
        }
        let (_, stats) = classify_improved_with(&case.polygon, case.point, case.policy, cfg.rule, tol);
        if stats.exhausted_all {
            summary.exhausted_all += 1;
        }
        if verdicts.agree() {
            summary.agree += 1;
        } else if summary.disagreements.len() < keep {
            summary.disagreements.push(Disagreement { case, verdicts });
        }
    }
    summary
}

/// Which claim of the improved method a reproduction refutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    /// An edge is legal but its window gives the wrong verdict.
    WrongWindow,
    /// No edge is legal but the point is not inside.
    WrongExhaustion,
    /// A baseline disagrees with the oracle.
    Baseline,
}

/// A self-contained, minimized failing instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub failure: Failure,
    pub rule: LegalityRule,
    pub polygon: ConvexPolygon,
    pub point: Point,
    /// The offending legal edge for [`Failure::WrongWindow`].
    pub edge: Option<usize>,
    pub foot: Option<Point>,
    pub window_verdict: Option<Classification>,
    pub oracle: Classification,
    pub source_case: usize,
    pub source_vertices: usize,
}

fn wrong_window_edge(poly: &ConvexPolygon, p: Point, rule: LegalityRule) -> Option<usize> {
    let tol = Tolerance::default();
    let truth = oracle_classify(poly, p, Tolerance::EXACT);
    legal_edges(poly, p, rule, tol).find(|&i| {
        let quad = poly.adjacent_quad(i).expect("edge index from legal_edges");
        classify_quad(&quad, p, poly.len(), tol) != truth
    })
}

fn wrong_exhaustion(poly: &ConvexPolygon, p: Point, rule: LegalityRule) -> bool {
    oracle_classify(poly, p, Tolerance::EXACT) != Classification::Inside
        && legal_edges(poly, p, rule, Tolerance::default()).next().is_none()
}

fn baseline_wrong(poly: &ConvexPolygon, p: Point) -> bool {
    let tol = Tolerance::default();
    let truth = oracle_classify(poly, p, Tolerance::EXACT);
    classify_raycast(poly, p, tol).0 != truth || classify_fan_triangulation(poly, p, tol).0 != truth
}

/// Shrink a failing case while it keeps failing the same way: drop
/// vertices, translate to the origin, then halve coordinates.
pub fn minimize(d: &Disagreement, rule: LegalityRule) -> Reproduction {
    let mut poly = d.case.polygon.clone();
    let mut p = d.case.point;
    let failure = if wrong_window_edge(&poly, p, rule).is_some() {
        Failure::WrongWindow
    } else if wrong_exhaustion(&poly, p, rule) {
        Failure::WrongExhaustion
    } else {
        Failure::Baseline
    };
    let still_fails = |poly: &ConvexPolygon, p: Point| {
        clear_of_boundary(poly, p, 0.5)
            && match failure {
                Failure::WrongWindow => wrong_window_edge(poly, p, rule).is_some(),
                Failure::WrongExhaustion => wrong_exhaustion(poly, p, rule),
                Failure::Baseline => baseline_wrong(poly, p),
            }
    };
    let exact = Tolerance::EXACT;

    let mut progress = true;
    while progress {
        progress = false;
        for k in 0..poly.len() {
            if poly.len() <= 3 {
                break;
            }
            let mut fewer = poly.vertices().to_vec();
            fewer.remove(k);
            if let Ok(smaller) = validate_convex(&fewer, exact) {
                if still_fails(&smaller, p) {
                    poly = smaller;
                    progress = true;
                    break;
                }
            }
        }
    }

    let bb = poly.bounding_box();
    let shift = bb.min;
    let moved: Vec<Point> = poly.vertices().iter().map(|&v| v - shift).collect();
    if let Ok(m) = validate_convex(&moved, exact) {
        if still_fails(&m, p - shift) {
            poly = m;
            p = p - shift;
        }
    }

    loop {
        let halve = |q: Point| Point::new((q.x / 2.0).round(), (q.y / 2.0).round());
        let halved: Vec<Point> = poly.vertices().iter().map(|&v| halve(v)).collect();
        let hp = halve(p);
        match validate_convex(&halved, exact) {
            Ok(h) if still_fails(&h, hp) => {
                poly = h;
                p = hp;
            }
            _ => break,
        }
    }

    let tol = Tolerance::default();
    let edge = match failure {
        Failure::WrongWindow => wrong_window_edge(&poly, p, rule),
        _ => None,
    };
    let foot = edge.map(|i| legality_test_with(&poly, i, p, rule, tol).expect("valid edge").foot);
    let window_verdict = edge.map(|i| classify_quad(&poly.adjacent_quad(i).expect("valid edge"), p, poly.len(), tol));
    Reproduction {
        failure,
        rule,
        oracle: oracle_classify(&poly, p, exact),
        polygon: poly,
        point: p,
        edge,
        foot,
        window_verdict,
        source_case: d.case.index,
        source_vertices: d.case.polygon.len(),
    }
}

/// Re-check a reproduction from scratch. True if it still demonstrates its
/// recorded failure.
pub fn reproduces(r: &Reproduction) -> bool {
    let (poly, p) = (&r.polygon, r.point);
    match r.failure {
        Failure::WrongWindow => match r.edge {
            Some(i) if i < poly.len() => {
                let tol = Tolerance::default();
                let legal = legality_test_with(poly, i, p, r.rule, tol).map(|o| o.legal).unwrap_or(false);
                let quad = poly.adjacent_quad(i).expect("checked index");
                legal && classify_quad(&quad, p, poly.len(), tol) != oracle_classify(poly, p, Tolerance::EXACT)
            }
            _ => false,
        },
        Failure::WrongExhaustion => wrong_exhaustion(poly, p, r.rule),
        Failure::Baseline => baseline_wrong(poly, p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_reproducible_and_off_the_boundary() {
        let cfg = FuzzConfig { cases: 50, max_n: 40, ..FuzzConfig::default() };
        for i in 0..cfg.cases {
            let a = make_case(&cfg, i);
            assert_eq!(a, make_case(&cfg, i));
            assert!((3..=40).contains(&a.polygon.len()));
            assert_ne!(oracle_classify(&a.polygon, a.point, Tolerance::EXACT), Classification::OnBoundary);
            assert_eq!(a.point.x, a.point.x.round());
        }
    }

    #[test]
    fn small_guarded_run_agrees() {
        let cfg = FuzzConfig { cases: 2000, max_n: 64, ..FuzzConfig::default() };
        let s = run_fuzz(&cfg, 5);
        assert_eq!(s.disagreement_count(), 0, "{:?}", s.disagreements.first());
        assert!(s.inside > 0 && s.outside > 0);
    }

    #[test]
    fn unguarded_failures_minimize_and_reproduce() {
        let cfg = FuzzConfig { cases: 2000, max_n: 64, rule: LegalityRule::Unguarded, ..FuzzConfig::default() };
        let s = run_fuzz(&cfg, 3);
        assert!(s.disagreement_count() > 0);
        for d in &s.disagreements {
            assert_eq!(d.verdicts.raycast, d.verdicts.oracle);
            assert_eq!(d.verdicts.fan, d.verdicts.oracle);
            let r = minimize(d, LegalityRule::Unguarded);
            assert_eq!(r.failure, Failure::WrongWindow);
            assert!(r.polygon.len() >= 5, "windows of triangles and quads are whole polygons");
            assert!(r.polygon.len() <= d.case.polygon.len());
            assert!(reproduces(&r));
            let mut guarded = r.clone();
            guarded.rule = LegalityRule::Guarded;
            assert!(!reproduces(&guarded));
        }
    }
}
