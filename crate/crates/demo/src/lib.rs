//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Polygons cross the boundary as the same JSON used on disk. The plain
//! functions below do the work; the `#[wasm_bindgen]` wrappers only turn
//! their errors into JS exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use convexpip::classify::{sigma, trace_improved, Algorithm, EdgeOrderPolicy, LegalityRule, TraceStep};
use convexpip::geom::{Point, Tolerance};
use convexpip::io::{parse_polygon, polygon_to_json};
use convexpip::polygon::{random_convex, Classification, ConvexPolygon, Quad};

#[derive(Serialize)]
struct Classified {
    verdict: Classification,
    edges_tried: usize,
    intersection_tests: usize,
    steps: Vec<TraceStep>,
    quad: Option<Quad>,
}

fn load(json: &str) -> Result<ConvexPolygon, String> {
    parse_polygon(json).map_err(|e| e.to_string())
}

fn point(x: f64, y: f64) -> Result<Point, String> {
    Point::try_new(x, y).map_err(|e| e.to_string())
}

pub fn generate_json(n: usize, seed: u64, radius: f64) -> Result<String, String> {
    if n < 3 {
        return Err(format!("need at least 3 vertices, got {n}"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err("radius must be positive".into());
    }
    Ok(polygon_to_json(&random_convex(n, seed, radius)))
}

pub fn classify_json(
    polygon: &str,
    x: f64,
    y: f64,
    algorithm: &str,
    policy_seed: u64,
    rule: &str,
) -> Result<String, String> {
    let poly = load(polygon)?;
    let p = point(x, y)?;
    let alg: Algorithm = algorithm.parse()?;
    let rule: LegalityRule = rule.parse()?;
    let policy = EdgeOrderPolicy::SeededShuffle(policy_seed);
    let tol = Tolerance::default();
    let (verdict, stats) = alg.classify(&poly, p, policy, rule, tol);
    let (steps, quad) = match alg {
        Algorithm::Improved => {
            let t = trace_improved(&poly, p, policy, rule, tol);
            (t.steps, t.quad)
        }
        _ => (Vec::new(), None),
    };
    let out = Classified {
        verdict,
        edges_tried: stats.edges_tried,
        intersection_tests: stats.intersection_tests,
        steps,
        quad,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Row-major legal-edge counts over a `cols x rows` grid of cell centres.
pub fn sigma_grid_values(
    polygon: &str,
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
    cols: usize,
    rows: usize,
) -> Result<Vec<u32>, String> {
    let poly = load(polygon)?;
    if cols == 0 || rows == 0 || cols * rows > 1 << 20 {
        return Err("grid must have between 1 and 2^20 cells".into());
    }
    let tol = Tolerance::default();
    let (dx, dy) = ((max_x - min_x) / cols as f64, (max_y - min_y) / rows as f64);
    let mut out = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        for c in 0..cols {
            let p = point(min_x + (c as f64 + 0.5) * dx, min_y + (r as f64 + 0.5) * dy)?;
            out.push(sigma(&poly, p, tol) as u32);
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn generate_polygon(n: usize, seed: u32, radius: f64) -> Result<String, JsError> {
    generate_json(n, u64::from(seed), radius).map_err(|e| JsError::new(&e))
}

/// Returns `{verdict, edges_tried, intersection_tests, steps, quad}`;
/// `steps` lists each perpendicular tried by the improved method.
#[wasm_bindgen]
pub fn classify(
    polygon: &str,
    x: f64,
    y: f64,
    algorithm: &str,
    policy_seed: u32,
    rule: &str,
) -> Result<String, JsError> {
    classify_json(polygon, x, y, algorithm, u64::from(policy_seed), rule).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sigma_grid(
    polygon: &str,
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
    cols: usize,
    rows: usize,
) -> Result<Vec<u32>, JsError> {
    sigma_grid_values(polygon, min_x, min_y, max_x, max_y, cols, rows).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]]}"#;

    #[test]
    fn classify_square() {
        let v: serde_json::Value =
            serde_json::from_str(&classify_json(SQUARE, 0.5, 0.5, "improved", 1, "guarded").unwrap()).unwrap();
        assert_eq!(v["verdict"], "inside");
        assert_eq!(v["steps"].as_array().unwrap().len(), 1);
        let v: serde_json::Value =
            serde_json::from_str(&classify_json(SQUARE, 3.0, 0.5, "fan", 1, "guarded").unwrap()).unwrap();
        assert_eq!(v["verdict"], "outside");
        assert!(classify_json(SQUARE, 0.5, 0.5, "angle", 1, "guarded").is_err());
    }

    #[test]
    fn generated_polygon_parses() {
        let json = generate_json(12, 3, 5.0).unwrap();
        assert_eq!(load(&json).unwrap().len(), 12);
        assert!(generate_json(2, 3, 5.0).is_err());
    }

    #[test]
    fn sigma_grid_shape() {
        let g = sigma_grid_values(SQUARE, -1.0, -1.0, 2.0, 2.0, 3, 3).unwrap();
        assert_eq!(g.len(), 9);
        // The centre cell is the square's centre, where all four edges are legal.
        assert_eq!(g[4], 4);
    }
}
