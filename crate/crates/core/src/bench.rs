//! Timing sweeps and the trial-count expectation check.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    classify_improved_in, edge_order, legal_edges, Algorithm, EdgeOrderPolicy, LegalityRule, ShuffleScratch, TrialStats,
};
use crate::geom::{Point, Tolerance};
use crate::polygon::{oracle_classify, random_convex, Classification, ConvexPolygon};

pub const DEFAULT_BENCH_SEED: u64 = 0x005E_ED0F_B3AC;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{algorithm} says {verdict} but the oracle says {expected} at ({x}, {y}); polygon: {polygon}")]
    OracleDisagreement {
        algorithm: Algorithm,
        verdict: Classification,
        expected: Classification,
        x: f64,
        y: f64,
        polygon: String,
    },
    #[error("invalid bench config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub polygon_sizes: Vec<usize>,
    pub points_per_set: usize,
    pub num_point_sets: usize,
    pub seed: u64,
    pub warmup_rounds: usize,
    pub repetitions: usize,
    /// Circumradius handed to the polygon generator.
    pub radius: f64,
    pub rule: LegalityRule,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            polygon_sizes: vec![100, 100, 100, 500, 500, 500, 1000, 1000, 1000, 2000],
            points_per_set: 1000,
            num_point_sets: 10,
            seed: DEFAULT_BENCH_SEED,
            warmup_rounds: 1,
            repetitions: 5,
            radius: 100.0,
            rule: LegalityRule::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::InvalidConfig(m.to_string()));
        if self.points_per_set == 0 {
            return bad("points_per_set must be positive");
        }
        if self.num_point_sets == 0 {
            return bad("num_point_sets must be positive");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive");
        }
        if self.polygon_sizes.is_empty() {
            return bad("polygon_sizes must not be empty");
        }
        if let Some(n) = self.polygon_sizes.iter().find(|&&n| n < 3) {
            return Err(BenchError::InvalidConfig(format!("polygon size {n} is below 3")));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad("radius must be positive and finite");
        }
        Ok(())
    }
}

/// Where the polygon sweep puts its single query point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum QueryRule {
    Centroid,
    /// `centroid + fraction * (v - centroid)` for a seeded random vertex `v`.
    TowardVertex {
        fraction: f64,
    },
}

impl QueryRule {
    pub const NEAR_BOUNDARY: QueryRule = QueryRule::TowardVertex { fraction: 0.9 };

    pub fn select(self, poly: &ConvexPolygon, seed: u64) -> Point {
        let c = poly.centroid();
        match self {
            QueryRule::Centroid => c,
            QueryRule::TowardVertex { fraction } => {
                let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
                let v = poly.vertex(rng.gen_range(0..poly.len()));
                c + (v - c) * fraction
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    PointSweep,
    PolygonSweep,
}

/// What a set was run against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetInfo {
    pub n_edges: usize,
    pub polygon_seed: Option<u64>,
    pub query: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub set: usize,
    pub walltime_ns: u64,
    pub relative_time: f64,
    pub intersection_tests: u64,
    pub edges_tried: u64,
    pub exhausted_all: u64,
    pub disagreements: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub config: BenchConfig,
    pub query: Option<QueryRule>,
    pub sets: Vec<SetInfo>,
    /// Ray casting's wall time on set 0; every `relative_time` divides by it.
    pub base_walltime_ns: u64,
    pub cells: Vec<Cell>,
}

impl SweepReport {
    pub fn cells_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &Cell> + '_ {
        self.cells.iter().filter(move |c| c.algorithm == algorithm)
    }

    pub fn total_intersection_tests(&self, algorithm: Algorithm) -> u64 {
        self.cells_for(algorithm).map(|c| c.intersection_tests).sum()
    }

    pub fn total_relative_time(&self, algorithm: Algorithm) -> f64 {
        self.cells_for(algorithm).map(|c| c.relative_time).sum()
    }

    /// Mean over sets of `time(a) / time(b)`.
    pub fn mean_time_ratio(&self, a: Algorithm, b: Algorithm) -> f64 {
        let ratios: Vec<f64> = self
            .cells_for(a)
            .zip(self.cells_for(b))
            .map(|(x, y)| x.walltime_ns as f64 / y.walltime_ns.max(1) as f64)
            .collect();
        ratios.iter().sum::<f64>() / ratios.len() as f64
    }

    pub fn total_disagreements(&self) -> u64 {
        self.cells.iter().map(|c| c.disagreements).sum()
    }
}

/// SplitMix64 finalizer over a pair; derives independent sub-seeds.
pub(crate) fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One unit of timed work: a polygon, the points to classify, and one
/// shuffle seed per point for the improved classifier.
struct Workload<'a> {
    poly: &'a ConvexPolygon,
    points: Vec<Point>,
    seeds: Vec<u64>,
}

#[derive(Default)]
struct Totals {
    intersection_tests: u64,
    edges_tried: u64,
    exhausted_all: u64,
}

impl Totals {
    fn add(&mut self, s: &TrialStats) {
        self.intersection_tests += s.intersection_tests as u64;
        self.edges_tried += s.edges_tried as u64;
        self.exhausted_all += u64::from(s.exhausted_all);
    }
}

fn run_once(
    alg: Algorithm,
    w: &Workload<'_>,
    rule: LegalityRule,
    tol: Tolerance,
    scratch: &mut ShuffleScratch,
) -> Vec<(Classification, TrialStats)> {
    w.points.iter().zip(&w.seeds).map(|(&p, &seed)| classify_one(alg, w.poly, p, seed, rule, tol, scratch)).collect()
}

#[inline]
fn classify_one(
    alg: Algorithm,
    poly: &ConvexPolygon,
    p: Point,
    seed: u64,
    rule: LegalityRule,
    tol: Tolerance,
    scratch: &mut ShuffleScratch,
) -> (Classification, TrialStats) {
    match alg {
        Algorithm::Improved => classify_improved_in(poly, p, EdgeOrderPolicy::SeededShuffle(seed), rule, tol, scratch),
        other => other.classify(poly, p, EdgeOrderPolicy::default(), rule, tol),
    }
}

fn time_once(
    alg: Algorithm,
    w: &Workload<'_>,
    rule: LegalityRule,
    tol: Tolerance,
    scratch: &mut ShuffleScratch,
) -> u64 {
    let start = Instant::now();
    for (&p, &seed) in w.points.iter().zip(&w.seeds) {
        black_box(classify_one(alg, w.poly, p, seed, rule, tol, scratch));
    }
    start.elapsed().as_nanos() as u64
}
fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}

/// Counters and the oracle cross-check come from an untimed pass; timing is
/// the median over `repetitions` interleaved rounds after warmup.
fn measure(workloads: &[Workload<'_>], cfg: &BenchConfig) -> Result<Vec<Cell>, BenchError> {
    let tol = Tolerance::default();
    let mut scratch = ShuffleScratch::default();
    let mut cells = Vec::with_capacity(workloads.len() * Algorithm::ALL.len());
    for (set, w) in workloads.iter().enumerate() {
        let mut totals: Vec<Totals> = Algorithm::ALL.iter().map(|_| Totals::default()).collect();
        for (ai, &alg) in Algorithm::ALL.iter().enumerate() {
            for ((verdict, stats), &p) in run_once(alg, w, cfg.rule, tol, &mut scratch).into_iter().zip(&w.points) {
                let expected = oracle_classify(w.poly, p, tol);
                if verdict != expected {
                    return Err(BenchError::OracleDisagreement {
                        algorithm: alg,
                        verdict,
                        expected,
                        x: p.x,
                        y: p.y,
                        polygon: serde_json::to_string(w.poly).unwrap_or_default(),
                    });
                }
                totals[ai].add(&stats);
            }
        }
        let mut times: Vec<Vec<u64>> = Algorithm::ALL.iter().map(|_| Vec::new()).collect();
        for round in 0..cfg.warmup_rounds + cfg.repetitions {
            for (ai, &alg) in Algorithm::ALL.iter().enumerate() {
                let ns = time_once(alg, w, cfg.rule, tol, &mut scratch);
                if round >= cfg.warmup_rounds {
                    times[ai].push(ns);
                }
            }
        }
        for (ai, &alg) in Algorithm::ALL.iter().enumerate() {
            let t = &totals[ai];
            cells.push(Cell {
                algorithm: alg,
                set,
                walltime_ns: median(std::mem::take(&mut times[ai])),
                relative_time: 0.0,
                intersection_tests: t.intersection_tests,
                edges_tried: t.edges_tried,
                exhausted_all: t.exhausted_all,
                disagreements: 0,
            });
        }
    }
    Ok(cells)
}

fn normalise(cells: &mut [Cell]) -> u64 {
    let base = cells
        .iter()
        .find(|c| c.set == 0 && c.algorithm == Algorithm::Raycast)
        .map(|c| c.walltime_ns)
        .unwrap_or(1)
        .max(1);
    for c in cells.iter_mut() {
        c.relative_time = c.walltime_ns as f64 / base as f64;
    }
    base
}

/// Uniform points in the bounding box of `poly`, `num_point_sets` sets of
/// `points_per_set` each.
pub fn sweep_points(poly: &ConvexPolygon, cfg: &BenchConfig) -> Vec<Vec<Point>> {
    let bb = poly.bounding_box();
    (0..cfg.num_point_sets)
        .map(|set| {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(mix(cfg.seed, set as u64 + 1));
            (0..cfg.points_per_set)
                .map(|_| Point::new(rng.gen_range(bb.min.x..=bb.max.x), rng.gen_range(bb.min.y..=bb.max.y)))
                .collect()
        })
        .collect()
}

fn run_seeds(seed: u64, set: usize, count: usize) -> Vec<u64> {
    let base = mix(seed, 0xA11C_E000 + set as u64);
    (0..count as u64).map(|k| mix(base, k)).collect()
}

/// Classify `num_point_sets x points_per_set` bounding-box points with all
/// three algorithms, one cell per (algorithm, set).
pub fn run_point_sweep(poly: &ConvexPolygon, cfg: &BenchConfig) -> Result<SweepReport, BenchError> {
    cfg.validate()?;
    let workloads: Vec<Workload<'_>> = sweep_points(poly, cfg)
        .into_iter()
        .enumerate()
        .map(|(set, points)| Workload { poly, seeds: run_seeds(cfg.seed, set, points.len()), points })
        .collect();
    let mut cells = measure(&workloads, cfg)?;
    let base_walltime_ns = normalise(&mut cells);
    Ok(SweepReport {
        kind: SweepKind::PointSweep,
        config: cfg.clone(),
        query: None,
        sets: (0..cfg.num_point_sets)
            .map(|_| SetInfo { n_edges: poly.len(), polygon_seed: None, query: None })
            .collect(),
        base_walltime_ns,
        cells,
    })
}

/// Seed used for set `set` of the polygon sweep.
pub fn polygon_seed(cfg: &BenchConfig, set: usize) -> u64 {
    mix(cfg.seed, 0x9017_0000 + set as u64)
}

/// One polygon per entry of `polygon_sizes`; each set classifies the single
/// query point `points_per_set` times, with a fresh shuffle seed per run.
pub fn run_polygon_sweep(cfg: &BenchConfig, query: QueryRule) -> Result<SweepReport, BenchError> {
    cfg.validate()?;
    let mut sets = Vec::with_capacity(cfg.polygon_sizes.len());
    let polys: Vec<ConvexPolygon> = cfg
        .polygon_sizes
        .iter()
        .enumerate()
        .map(|(set, &n)| random_convex(n, polygon_seed(cfg, set), cfg.radius))
        .collect();
    let mut workloads = Vec::with_capacity(polys.len());
    for (set, poly) in polys.iter().enumerate() {
        let seed = polygon_seed(cfg, set);
        let q = query.select(poly, mix(seed, 1));
        sets.push(SetInfo { n_edges: poly.len(), polygon_seed: Some(seed), query: Some(q) });
        workloads.push(Workload {
            poly,
            points: vec![q; cfg.points_per_set],
            seeds: run_seeds(cfg.seed, set, cfg.points_per_set),
        });
    }
    let mut cells = measure(&workloads, cfg)?;
    let base_walltime_ns = normalise(&mut cells);
    Ok(SweepReport {
        kind: SweepKind::PolygonSweep,
        config: cfg.clone(),
        query: Some(query),
        sets,
        base_walltime_ns,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub n_edges: usize,
    pub sigma: usize,
    /// `N / sigma`; absent when no edge is legal.
    pub predicted: Option<f64>,
    /// Mean trials under sampling with replacement; when `sigma == 0` that
    /// mode never stops, so this holds the shuffle mean (always `N`).
    pub observed_mean_trials: f64,
    /// Mean `edges_tried` of the shuffled classifier.
    pub shuffle_mean_trials: f64,
    pub runs: usize,
    pub relative_error: Option<f64>,
    pub seed: u64,
}

/// Run the improved classifier `runs` times with independent shuffle seeds
/// and compare the mean trial count against `N / sigma`.
///
/// The with-replacement mode is coupled to each run's shuffle: at every step
/// it redraws one of the `k` edges already seen with probability `k / N`,
/// and otherwise takes the next edge of the same permutation. Each draw is
/// still uniform over all `N` edges, and a run never needs fewer draws than
/// its shuffle.
pub fn trial_expectation_check(
    poly: &ConvexPolygon,
    p: Point,
    runs: usize,
    seed: u64,
    rule: LegalityRule,
) -> ExpectationReport {
    assert!(runs >= 1, "runs must be at least 1");
    let tol = Tolerance::default();
    let n = poly.len();
    let mut legal = vec![false; n];
    for i in legal_edges(poly, p, rule, tol) {
        legal[i] = true;
    }
    let sigma = legal.iter().filter(|&&l| l).count();

    let mut scratch = ShuffleScratch::default();
    let mut coin = Xoshiro256PlusPlus::seed_from_u64(mix(seed, 0xC011));
    let mut shuffle_total = 0u64;
    let mut wr_total = 0u64;
    for r in 0..runs as u64 {
        let policy = EdgeOrderPolicy::SeededShuffle(mix(seed, r));
        let (_, stats) = classify_improved_in(poly, p, policy, rule, tol, &mut scratch);
        shuffle_total += stats.edges_tried as u64;
        if sigma == 0 {
            continue;
        }
        let mut draws = 0u64;
        for (seen, i) in edge_order(policy, n, &mut scratch).enumerate() {
            // Redraws land on edges already known to be illegal.
            while coin.gen_range(0..n) < seen {
                draws += 1;
            }
            draws += 1;
            if legal[i] {
                break;
            }
        }
        wr_total += draws;
    }
    let shuffle_mean = shuffle_total as f64 / runs as f64;
    let predicted = (sigma > 0).then(|| n as f64 / sigma as f64);
    let observed = if sigma > 0 { wr_total as f64 / runs as f64 } else { shuffle_mean };
    ExpectationReport {
        n_edges: n,
        sigma,
        predicted,
        observed_mean_trials: observed,
        shuffle_mean_trials: shuffle_mean,
        runs,
        relative_error: predicted.map(|e| (observed - e).abs() / e),
        seed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationConfig {
    pub pairs: usize,
    pub runs: usize,
    pub min_n: usize,
    pub max_n: usize,
    pub seed: u64,
    pub radius: f64,
    pub rule: LegalityRule,
}

impl Default for ExpectationConfig {
    fn default() -> Self {
        ExpectationConfig {
            pairs: 100,
            runs: 10_000,
            min_n: 3,
            max_n: 256,
            seed: DEFAULT_BENCH_SEED,
            radius: 100.0,
            rule: LegalityRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationBatch {
    pub config: ExpectationConfig,
    pub rows: Vec<ExpectationReport>,
}

impl ExpectationBatch {
    pub fn max_relative_error(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.relative_error).fold(0.0, f64::max)
    }
}

/// `pairs` random (polygon, point) pairs with `sigma >= 1`, each put through
/// [`trial_expectation_check`]. Points are drawn from the bounding box and
/// redrawn until at least one edge is legal.
pub fn run_expectation_batch(cfg: &ExpectationConfig) -> Result<ExpectationBatch, BenchError> {
    if cfg.pairs == 0 || cfg.runs == 0 {
        return Err(BenchError::InvalidConfig("pairs and runs must be positive".into()));
    }
    if cfg.min_n < 3 || cfg.max_n < cfg.min_n {
        return Err(BenchError::InvalidConfig(format!(
            "vertex range {}..={} is empty or below 3",
            cfg.min_n, cfg.max_n
        )));
    }
    let tol = Tolerance::default();
    let mut rows = Vec::with_capacity(cfg.pairs);
    for k in 0..cfg.pairs as u64 {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(mix(cfg.seed, k));
        let n = rng.gen_range(cfg.min_n..=cfg.max_n);
        let poly = random_convex(n, rng.gen(), cfg.radius);
        let bb = poly.bounding_box();
        let p = loop {
            let p = Point::new(rng.gen_range(bb.min.x..=bb.max.x), rng.gen_range(bb.min.y..=bb.max.y));
            if legal_edges(&poly, p, cfg.rule, tol).next().is_some() {
                break p;
            }
        };
        rows.push(trial_expectation_check(&poly, p, cfg.runs, mix(cfg.seed, !k), cfg.rule));
    }
    Ok(ExpectationBatch { config: cfg.clone(), rows })
}
