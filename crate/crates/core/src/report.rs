//! CSV, JSON and SVG renderings of sweep and expectation reports.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::{ExpectationBatch, SweepReport};
use crate::classify::Algorithm;

pub const SWEEP_CSV_HEADER: &str =
    "algorithm,set,walltime_ns,relative_time,intersection_tests,edges_tried,exhausted_all,disagreements";
pub const EXPECTATION_CSV_HEADER: &str =
    "n_edges,sigma,predicted,observed_mean_trials,shuffle_mean_trials,runs,relative_error";

/// CSV columns that carry wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 2] = ["walltime_ns", "relative_time"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(ReportError::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("report json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Report {
    Sweep(SweepReport),
    Expectation(ExpectationBatch),
}

pub fn emit_report(report: &Report, format: Format) -> Result<String, ReportError> {
    match (report, format) {
        (_, Format::Json) => Ok(serde_json::to_string_pretty(report)? + "\n"),
        (Report::Sweep(r), Format::Csv) => Ok(sweep_csv(r)),
        (Report::Sweep(r), Format::Svg) => Ok(sweep_svg(r)),
        (Report::Expectation(b), Format::Csv) => Ok(expectation_csv(b)),
        (Report::Expectation(_), Format::Svg) => {
            Err(ReportError::UnsupportedFormat("svg has no rendering for expectation reports".into()))
        }
    }
}

pub fn parse_report(json: &str) -> Result<Report, ReportError> {
    Ok(serde_json::from_str(json)?)
}

fn sweep_csv(r: &SweepReport) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for c in &r.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.algorithm,
            c.set,
            c.walltime_ns,
            c.relative_time,
            c.intersection_tests,
            c.edges_tried,
            c.exhausted_all,
            c.disagreements
        );
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn expectation_csv(b: &ExpectationBatch) -> String {
    let mut out = String::from(EXPECTATION_CSV_HEADER);
    out.push('\n');
    for r in &b.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n_edges,
            r.sigma,
            opt(r.predicted),
            r.observed_mean_trials,
            r.shuffle_mean_trials,
            r.runs,
            opt(r.relative_error)
        );
    }
    out
}

/// Drop the named columns from a CSV document.
pub fn strip_columns(csv: &str, drop: &[&str]) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let keep: Vec<bool> = header.split(',').map(|h| !drop.contains(&h)).collect();
    let pick =
        |line: &str| line.split(',').zip(&keep).filter(|(_, &k)| k).map(|(f, _)| f).collect::<Vec<_>>().join(",");
    let mut out = pick(header);
    out.push('\n');
    for line in lines {
        out.push_str(&pick(line));
        out.push('\n');
    }
    out
}

const COLOURS: [&str; 3] = ["#d62728", "#1f77b4", "#2ca02c"];

fn sweep_svg(r: &SweepReport) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let sets = r.sets.len().max(1);
    let y_max = r.cells.iter().map(|c| c.relative_time).fold(1.0, f64::max) * 1.05;
    let sx = |set: usize| pad + (w - 2.0 * pad) * if sets == 1 { 0.5 } else { set as f64 / (sets - 1) as f64 };
    let sy = |y: f64| h - pad - (h - 2.0 * pad) * y / y_max;

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, h - pad, w - pad, h - pad);
    let _ = writeln!(out, r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#, h - pad);
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">set</text>"#, w / 2.0, h - 10.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">relative time</text>"#,
        h / 2.0,
        h / 2.0
    );
    for set in 0..sets {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
            sx(set),
            h - pad + 15.0,
            set + 1
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{:.1}" font-size="10" text-anchor="end">{:.2}</text>"#,
        pad - 4.0,
        sy(y_max),
        y_max
    );
    let _ = writeln!(out, r#"<text x="{}" y="{:.1}" font-size="10" text-anchor="end">0</text>"#, pad - 4.0, sy(0.0));

    for (k, alg) in Algorithm::ALL.iter().enumerate() {
        let pts: Vec<String> =
            r.cells_for(*alg).map(|c| format!("{:.1},{:.1}", sx(c.set), sy(c.relative_time))).collect();
        if pts.is_empty() {
            continue;
        }
        let colour = COLOURS[k % COLOURS.len()];
        let _ =
            writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{colour}">{alg}</text>"#,
            w - pad - 70.0,
            pad + 15.0 * k as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{run_expectation_batch, run_point_sweep, BenchConfig, ExpectationConfig};
    use crate::polygon::random_convex;

    fn sweep() -> SweepReport {
        let cfg = BenchConfig { points_per_set: 20, warmup_rounds: 0, repetitions: 1, ..BenchConfig::default() };
        run_point_sweep(&random_convex(30, 4, 10.0), &cfg).unwrap()
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let csv = emit_report(&Report::Sweep(sweep()), Format::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines.len(), 31);
        assert!(lines[1].starts_with("improved,0,"));
    }

    #[test]
    fn json_round_trips() {
        let r = Report::Sweep(sweep());
        let back = parse_report(&emit_report(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(back, r);

        let cfg = ExpectationConfig { pairs: 2, runs: 50, max_n: 10, ..ExpectationConfig::default() };
        let e = Report::Expectation(run_expectation_batch(&cfg).unwrap());
        assert_eq!(parse_report(&emit_report(&e, Format::Json).unwrap()).unwrap(), e);
    }

    #[test]
    fn svg_has_one_polyline_per_algorithm() {
        let svg = emit_report(&Report::Sweep(sweep()), Format::Svg).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn expectation_svg_is_unsupported() {
        let cfg = ExpectationConfig { pairs: 1, runs: 10, max_n: 5, ..ExpectationConfig::default() };
        let e = Report::Expectation(run_expectation_batch(&cfg).unwrap());
        assert!(matches!(emit_report(&e, Format::Svg), Err(ReportError::UnsupportedFormat(_))));
        let csv = emit_report(&e, Format::Csv).unwrap();
        assert_eq!(csv.lines().next(), Some(EXPECTATION_CSV_HEADER));
    }

    #[test]
    fn unknown_format_name() {
        assert!(matches!("png".parse::<Format>(), Err(ReportError::UnsupportedFormat(_))));
        assert_eq!("svg".parse::<Format>().unwrap(), Format::Svg);
    }

    #[test]
    fn strip_timing_columns() {
        let csv = "algorithm,set,walltime_ns,relative_time,x\nfan,0,12,0.5,7\n";
        assert_eq!(strip_columns(csv, &TIMING_COLUMNS), "algorithm,set,x\nfan,0,7\n");
    }
}
