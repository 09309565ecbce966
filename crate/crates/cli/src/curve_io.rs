//! Curve files: JSON `{"closed": bool, "vertices": [[x, y, z], ...]}` or
//! CSV with one `x,y,z` vertex per line, `#` comments, and a `#closed`
//! comment line marking a closed curve.

use std::path::Path;

use knotmeasure::geometry::{Point3, PolygonalCurve};
use knotmeasure::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CurveFormat {
    Json,
    Csv,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveFile {
    closed: bool,
    vertices: Vec<[f64; 3]>,
}

fn input_error(what: &str, e: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{what}: {e}"))
}

/// Parses `text`, guessing JSON when it starts with `{`.
pub fn parse_curve(text: &str, format: Option<CurveFormat>) -> Result<PolygonalCurve> {
    let format = format.unwrap_or(if text.trim_start().starts_with('{') { CurveFormat::Json } else { CurveFormat::Csv });
    let (vertices, closed) = match format {
        CurveFormat::Json => {
            let f: CurveFile = serde_json::from_str(text).map_err(|e| input_error("curve JSON", e))?;
            (f.vertices, f.closed)
        }
        CurveFormat::Csv => {
            let closed = text.lines().any(|l| l.trim().eq_ignore_ascii_case("#closed"));
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(false)
                .comment(Some(b'#'))
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let vertices = rdr
                .deserialize::<[f64; 3]>()
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| input_error("curve CSV", e))?;
            (vertices, closed)
        }
    };
    PolygonalCurve::new(vertices.into_iter().map(Point3::from).collect(), closed)
}

pub fn read_curve(path: &Path) -> Result<PolygonalCurve> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(&path.display().to_string(), e))?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Some(CurveFormat::Json),
        Some("csv") => Some(CurveFormat::Csv),
        _ => None,
    };
    parse_curve(&text, format)
}

/// Serialises with shortest round-trip float formatting, so reading the
/// output back gives identical vertices.
pub fn write_curve(curve: &PolygonalCurve, format: CurveFormat) -> String {
    let vertices: Vec<[f64; 3]> = curve.vertices().iter().map(|&p| p.into()).collect();
    match format {
        CurveFormat::Json => {
            let mut s = serde_json::to_string(&CurveFile { closed: curve.is_closed(), vertices }).expect("finite floats");
            s.push('\n');
            s
        }
        CurveFormat::Csv => {
            let mut s = String::from(if curve.is_closed() { "#closed\n" } else { "#open\n" });
            for [x, y, z] in vertices {
                s.push_str(&format!("{x:?},{y:?},{z:?}\n"));
            }
            s
        }
    }
}
