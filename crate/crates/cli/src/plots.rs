//! Vega-Lite specs for the spacing histograms and rigidity curves. Each spec
//! reads its CSV by relative URL and carries the reference curves inline.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use spectra_core::{reference_delta3, reference_pofs, Reference};

use crate::error::{CliError, Result};
use crate::output::write_json;

const SCHEMA: &str = "https://vega.github.io/schema/vega-lite/v5.json";
const CURVE_POINTS: usize = 200;

fn column_max(path: &Path, column: &str) -> Result<f64> {
    let bad = |msg: String| CliError::Stats(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let idx = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| bad(format!("no column {column}")))?;
    let mut max = f64::NEG_INFINITY;
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let x: f64 = record[idx]
            .parse()
            .map_err(|_| bad(format!("bad {column} {:?}", &record[idx])))?;
        max = max.max(x);
    }
    if max.is_finite() {
        Ok(max)
    } else {
        Err(bad("no rows".into()))
    }
}

fn curve(lo: f64, hi: f64, f: impl Fn(Reference, f64) -> f64) -> Value {
    let mut values = Vec::with_capacity(2 * (CURVE_POINTS + 1));
    for kind in [Reference::Goe, Reference::Poisson] {
        for i in 0..=CURVE_POINTS {
            let x = lo + (hi - lo) * i as f64 / CURVE_POINTS as f64;
            values.push(json!({"x": x, "y": f(kind, x), "reference": kind.to_string()}));
        }
    }
    Value::Array(values)
}

fn reference_layer(values: Value) -> Value {
    json!({
        "data": {"values": values},
        "mark": {"type": "line"},
        "encoding": {
            "x": {"field": "x", "type": "quantitative"},
            "y": {"field": "y", "type": "quantitative"},
            "strokeDash": {"field": "reference", "type": "nominal", "title": "reference"},
            "color": {"value": "black"}
        }
    })
}

fn pofs_spec(csv: &str, s_max: f64, facet: bool) -> Value {
    let bars = json!({
        "mark": {"type": "bar", "opacity": 0.6},
        "encoding": {
            "x": {"field": "bin_center", "type": "quantitative", "title": "S"},
            "y": {"field": "density", "type": "quantitative", "title": "P(S)"}
        }
    });
    let mut spec = json!({
        "$schema": SCHEMA,
        "description": "Nearest-neighbour spacing distribution with Poisson (dashed) and GOE references",
    });
    if facet {
        // Faceting needs a single dataset, so the references come from the
        // table's own columns here.
        spec["data"] = json!({"url": csv, "format": {"type": "csv"}});
        spec["facet"] = json!({"field": "cell", "type": "nominal"});
        spec["columns"] = json!(3);
        spec["spec"] = json!({
            "width": 240,
            "height": 180,
            "layer": [bars, {
                "mark": {"type": "line", "color": "black"},
                "encoding": {
                    "x": {"field": "bin_center", "type": "quantitative"},
                    "y": {"field": "reference_goe", "type": "quantitative"}
                }
            }, {
                "mark": {"type": "line", "color": "black", "strokeDash": [4, 3]},
                "encoding": {
                    "x": {"field": "bin_center", "type": "quantitative"},
                    "y": {"field": "reference_poisson", "type": "quantitative"}
                }
            }]
        });
    } else {
        spec["width"] = json!(480);
        spec["height"] = json!(320);
        spec["layer"] = json!([
            {"data": {"url": csv, "format": {"type": "csv"}}, "layer": [bars]},
            reference_layer(curve(0.0, s_max, reference_pofs)),
        ]);
    }
    spec
}

fn delta3_spec(csv: &str, l_max: f64, colour_by: Option<&str>) -> Value {
    let mut points = json!({
        "mark": {"type": "line", "point": true},
        "encoding": {
            "x": {"field": "L", "type": "quantitative", "title": "L"},
            "y": {"field": "value", "type": "quantitative", "title": "Δ₃(L)"}
        }
    });
    if let Some(field) = colour_by {
        points["encoding"]["color"] = json!({"field": field, "type": "nominal"});
    }
    json!({
        "$schema": SCHEMA,
        "description": "Spectral rigidity with Poisson (dashed) and GOE references",
        "width": 480,
        "height": 320,
        "layer": [
            {"data": {"url": csv, "format": {"type": "csv"}}, "layer": [points]},
            reference_layer(curve(l_max / CURVE_POINTS as f64, l_max, reference_delta3)),
        ]
    })
}

/// Writes a `.vl.json` spec next to every recognized table in `dir`.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(CliError::MissingInput(format!("{} is not a directory", dir.display())));
    }
    let mut written = Vec::new();
    let mut emit = |name: &str, spec: Value| -> Result<()> {
        let path = dir.join(name);
        write_json(&path, &spec)?;
        written.push(path);
        Ok(())
    };

    let pofs = dir.join("pofs.csv");
    if pofs.exists() {
        let s_max = column_max(&pofs, "bin_center")?;
        emit("pofs.vl.json", pofs_spec("pofs.csv", s_max, false))?;
    }
    let d3 = dir.join("delta3.csv");
    if d3.exists() {
        emit("delta3.vl.json", delta3_spec("delta3.csv", column_max(&d3, "L")?, None))?;
    }
    let sweep_pofs = dir.join("sweep_pofs.csv");
    if sweep_pofs.exists() {
        let s_max = column_max(&sweep_pofs, "bin_center")?;
        emit("sweep_pofs.vl.json", pofs_spec("sweep_pofs.csv", s_max, true))?;
    }
    let sweep_d3 = dir.join("sweep_delta3.csv");
    if sweep_d3.exists() {
        let l_max = column_max(&sweep_d3, "L")?;
        emit(
            "sweep_delta3.vl.json",
            delta3_spec("sweep_delta3.csv", l_max, Some("cell")),
        )?;
    }
    if written.is_empty() {
        return Err(CliError::MissingInput(format!(
            "no pofs.csv, delta3.csv or sweep tables in {}",
            dir.display()
        )));
    }
    Ok(written)
}
