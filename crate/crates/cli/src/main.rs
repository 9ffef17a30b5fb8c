use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use convexpip::bench::{
    run_expectation_batch, run_point_sweep, run_polygon_sweep, BenchConfig, ExpectationConfig, QueryRule,
    DEFAULT_BENCH_SEED,
};
use convexpip::classify::{Algorithm, EdgeOrderPolicy, LegalityRule, DEFAULT_POLICY_SEED};
use convexpip::fuzz::{minimize, run_fuzz, FuzzConfig, DEFAULT_FUZZ_SEED};
use convexpip::geom::{Point, Tolerance};
use convexpip::io::{polygon_to_json, read_polygon};
use convexpip::polygon::random_convex;
use convexpip::report::{emit_report, Format, Report};

/// Point-in-convex-polygon classification, benchmarking and fuzzing.
#[derive(Parser)]
#[command(name = "convexpip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a point against a polygon file.
    Classify(ClassifyArgs),
    /// Write a random strictly convex polygon.
    Generate(GenerateArgs),
    /// Check that a polygon file is strictly convex.
    Validate { polygon: PathBuf },
    /// Run a benchmark sweep or the expectation check.
    Bench(BenchArgs),
    /// Differential fuzzing of all classifiers against the oracle.
    Fuzz(FuzzArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    polygon: PathBuf,
    /// Query point as "x,y".
    #[arg(allow_hyphen_values = true)]
    point: String,
    #[arg(long, default_value = "improved")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = DEFAULT_POLICY_SEED)]
    policy_seed: u64,
    #[arg(long, default_value = "guarded")]
    legality: LegalityRule,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    PointSweep,
    PolygonSweep,
    Expectation,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Svg => Format::Svg,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "point-sweep")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_BENCH_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Polygon file for the point sweep; a random polygon otherwise.
    #[arg(long)]
    polygon: Option<PathBuf>,
    /// Vertex count of the random point-sweep polygon.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Comma-separated polygon sizes for the polygon sweep.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    points_per_set: Option<usize>,
    #[arg(long)]
    sets: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// "centroid", "near-boundary", or "toward:<fraction>".
    #[arg(long, default_value = "centroid")]
    query: String,
    /// Expectation mode: number of (polygon, point) pairs.
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    /// Expectation mode: runs per pair.
    #[arg(long, default_value_t = 10_000)]
    runs: usize,
    #[arg(long, default_value_t = 256)]
    max_n: usize,
    #[arg(long, default_value = "guarded")]
    legality: LegalityRule,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 100_000)]
    cases: usize,
    #[arg(long, default_value_t = 256)]
    max_n: usize,
    #[arg(long, default_value_t = DEFAULT_FUZZ_SEED)]
    seed: u64,
    #[arg(long, default_value = "guarded")]
    legality: LegalityRule,
    /// Where minimized reproductions are written.
    #[arg(long, default_value = "fuzz-repros")]
    repro_dir: PathBuf,
}

enum Failure {
    Usage(String),
    Input(String),
    Io(String),
    Disagreement(String),
}

impl Failure {
    fn report(&self) -> ExitCode {
        let (tag, msg, code) = match self {
            Failure::Usage(m) => ("usage", m, 2),
            Failure::Input(m) => ("input", m, 2),
            Failure::Io(m) => ("io", m, 2),
            Failure::Disagreement(m) => ("disagreement", m, 1),
        };
        eprintln!("error[{tag}]: {}", msg.replace('\n', " "));
        ExitCode::from(code)
    }
}

type Outcome = Result<(), Failure>;

fn parse_point(s: &str) -> Result<Point, Failure> {
    let bad = || Failure::Input(format!("point '{s}' is not \"x,y\""));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    Point::try_new(x, y).map_err(|_| bad())
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn load(path: &Path) -> Result<convexpip::polygon::ConvexPolygon, Failure> {
    read_polygon(path).map_err(|e| Failure::Input(e.to_string()))
}

fn cmd_classify(a: ClassifyArgs) -> Outcome {
    let poly = load(&a.polygon)?;
    let p = parse_point(&a.point)?;
    let policy = EdgeOrderPolicy::SeededShuffle(a.policy_seed);
    let (verdict, stats) = a.algorithm.classify(&poly, p, policy, a.legality, Tolerance::default());
    println!("{verdict}");
    println!("edges_tried={} intersection_tests={}", stats.edges_tried, stats.intersection_tests);
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Outcome {
    if a.n < 3 {
        return Err(Failure::Usage(format!("--n {} is below 3", a.n)));
    }
    if !(a.radius.is_finite() && a.radius > 0.0) {
        return Err(Failure::Usage("--radius must be positive".into()));
    }
    emit(&polygon_to_json(&random_convex(a.n, a.seed, a.radius)), a.out.as_deref())
}

fn cmd_validate(path: &Path) -> Outcome {
    let poly = load(path)?;
    println!("valid: {} vertices", poly.len());
    Ok(())
}

fn parse_query(s: &str) -> Result<QueryRule, Failure> {
    match s {
        "centroid" => Ok(QueryRule::Centroid),
        "near-boundary" => Ok(QueryRule::NEAR_BOUNDARY),
        _ => s
            .strip_prefix("toward:")
            .and_then(|f| f.parse::<f64>().ok())
            .filter(|f| (0.0..=1.0).contains(f))
            .map(|fraction| QueryRule::TowardVertex { fraction })
            .ok_or_else(|| Failure::Usage(format!("unknown query rule '{s}'"))),
    }
}

fn cmd_bench(a: BenchArgs) -> Outcome {
    let format = Format::from(a.format);
    let report = match a.mode {
        Mode::Expectation => {
            let cfg = ExpectationConfig {
                pairs: a.pairs,
                runs: a.runs,
                max_n: a.max_n,
                seed: a.seed,
                rule: a.legality,
                ..ExpectationConfig::default()
            };
            Report::Expectation(run_expectation_batch(&cfg).map_err(|e| Failure::Usage(e.to_string()))?)
        }
        mode => {
            let mut cfg = BenchConfig { seed: a.seed, rule: a.legality, ..BenchConfig::default() };
            if let Some(s) = a.sizes {
                cfg.polygon_sizes = s;
            }
            cfg.points_per_set = a.points_per_set.unwrap_or(cfg.points_per_set);
            cfg.num_point_sets = a.sets.unwrap_or(cfg.num_point_sets);
            cfg.warmup_rounds = a.warmup.unwrap_or(cfg.warmup_rounds);
            cfg.repetitions = a.repetitions.unwrap_or(cfg.repetitions);
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let sweep = if let Mode::PointSweep = mode {
                let poly = match &a.polygon {
                    Some(path) => load(path)?,
                    None if a.n >= 3 => random_convex(a.n, a.seed, cfg.radius),
                    None => return Err(Failure::Usage(format!("--n {} is below 3", a.n))),
                };
                run_point_sweep(&poly, &cfg)
            } else {
                run_polygon_sweep(&cfg, parse_query(&a.query)?)
            };
            Report::Sweep(sweep.map_err(|e| Failure::Disagreement(e.to_string()))?)
        }
    };
    let text = emit_report(&report, format).map_err(|e| Failure::Usage(e.to_string()))?;
    emit(&text, a.out.as_deref())
}

fn cmd_fuzz(a: FuzzArgs) -> Outcome {
    if a.cases == 0 {
        return Err(Failure::Usage("--cases must be at least 1".into()));
    }
    if a.max_n < 3 {
        return Err(Failure::Usage(format!("--max-n {} is below 3; a polygon needs 3 vertices", a.max_n)));
    }
    let cfg = FuzzConfig { cases: a.cases, max_n: a.max_n, seed: a.seed, rule: a.legality, ..FuzzConfig::default() };
    let summary = run_fuzz(&cfg, 1);
    println!("{}/{} agree", summary.agree, summary.cases);
    println!("inside={} outside={} exhausted_all={}", summary.inside, summary.outside, summary.exhausted_all);
    let Some(d) = summary.disagreements.first() else {
        return Ok(());
    };
    let repro = minimize(d, cfg.rule);
    fs::create_dir_all(&a.repro_dir)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", a.repro_dir.display())))?;
    let path = a.repro_dir.join(format!("repro-seed{}-case{}.json", cfg.seed, d.case.index));
    let json = serde_json::to_string_pretty(&repro).map_err(|e| Failure::Io(e.to_string()))? + "\n";
    fs::write(&path, json).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    Err(Failure::Disagreement(format!(
        "{} of {} cases disagree; minimized reproduction in {}",
        summary.disagreement_count(),
        summary.cases,
        path.display()
    )))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return Failure::Usage(first).report();
        }
    };
    let outcome = match cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Validate { polygon } => cmd_validate(&polygon),
        Command::Bench(a) => cmd_bench(a),
        Command::Fuzz(a) => cmd_fuzz(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
