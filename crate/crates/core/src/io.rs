//! Polygon files.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geom::{Point, Tolerance};
use crate::polygon::{validate_convex, ConvexPolygon, PolygonError, RawPolygon};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed polygon json: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid polygon: {0}")]
    Invalid(#[from] PolygonError),
}

/// Parse and validate `{"vertices": [[x, y], ...]}`.
pub fn parse_polygon(json: &str) -> Result<ConvexPolygon, IoError> {
    let raw: RawPolygon = serde_json::from_str(json)?;
    let pts: Vec<Point> = raw.vertices.iter().map(|&[x, y]| Point { x, y }).collect();
    Ok(validate_convex(&pts, Tolerance::default())?)
}

pub fn read_polygon(path: &Path) -> Result<ConvexPolygon, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    parse_polygon(&text)
}

/// One vertex per line.
pub fn polygon_to_json(poly: &ConvexPolygon) -> String {
    let num = |x: f64| serde_json::to_string(&x).expect("finite coordinate");
    let rows: Vec<String> = poly.vertices().iter().map(|p| format!("    [{}, {}]", num(p.x), num(p.y))).collect();
    format!("{{\n  \"vertices\": [\n{}\n  ]\n}}\n", rows.join(",\n"))
}

pub fn write_polygon(path: &Path, poly: &ConvexPolygon) -> Result<(), IoError> {
    fs::write(path, polygon_to_json(poly)).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}
