//! Input files and machine-readable output.
//!
//! JSON numbers are written with 17 significant digits so every double
//! round-trips exactly; documents carry `"schema_version": 1`.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::configuration::Configuration;
use crate::error::{CcError, Result};
use crate::geometry::{chart_to_ambient, ChartPoint, HPoint};
use crate::search::CCRecord;

pub const SCHEMA_VERSION: u32 = 1;

/// Parses `1,2.5,3` or `equal:N`.
pub fn parse_masses(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let masses = if let Some(n) = s.strip_prefix("equal:") {
        let n: usize = n.trim().parse().map_err(|_| CcError::Parse(format!("bad body count in {s:?}")))?;
        vec![1.0; n]
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| CcError::Parse(format!("bad mass {t:?}"))))
            .collect::<Result<Vec<_>>>()?
    };
    if masses.is_empty() || masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(CcError::Parse(format!("masses must be positive and finite: {s:?}")));
    }
    Ok(masses)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MassSpec {
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
struct AmbientEntry {
    x: f64,
    y: f64,
    w: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct ChartEntry {
    theta: f64,
    phi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    masses: MassSpec,
    #[serde(default)]
    points: Option<Vec<AmbientEntry>>,
    #[serde(default)]
    chart: Option<Vec<ChartEntry>>,
}

/// `{masses, points: [{x, y, w}]}` or `{masses, chart: [{theta, phi}]}`.
pub fn parse_configuration(text: &str) -> Result<Configuration> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| CcError::Parse(e.to_string()))?;
    let masses = match file.masses {
        MassSpec::List(m) => m,
        MassSpec::Text(s) => parse_masses(&s)?,
    };
    let points = match (file.points, file.chart) {
        (Some(p), None) => p.iter().map(|e| HPoint::new(e.x, e.y, e.w)).collect::<Result<Vec<_>>>()?,
        (None, Some(c)) => c
            .iter()
            .map(|e| chart_to_ambient(&ChartPoint { theta: e.theta, phi: e.phi }))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(CcError::Parse("give exactly one of \"points\" or \"chart\"".into())),
    };
    Configuration::new(points, masses)
}

pub fn load_configuration(path: &Path) -> Result<Configuration> {
    let text = std::fs::read_to_string(path).map_err(|e| CcError::Parse(format!("{}: {e}", path.display())))?;
    parse_configuration(&text)
}

/// Ambient form of a configuration file.
pub fn configuration_json(config: &Configuration) -> serde_json::Value {
    let points: Vec<_> = config.points().iter().map(|p| serde_json::json!({ "x": p.x, "y": p.y, "w": p.w })).collect();
    serde_json::json!({ "masses": config.masses(), "points": points })
}

/// Compact JSON with floats at 17 significant digits.
struct RoundTripFormatter;

impl Formatter for RoundTripFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// `d.dddddddddddddddde±x`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTripFormatter);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// `{"schema_version": 1, "command": .., "data": ..}`.
pub fn envelope<T: Serialize>(command: &str, data: &T) -> String {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        schema_version: u32,
        command: &'a str,
        data: &'a T,
    }
    to_json(&Envelope { schema_version: SCHEMA_VERSION, command, data })
}

fn coordinate_header(n: usize) -> Vec<String> {
    (1..=n).flat_map(|i| [format!("x{i}"), format!("y{i}"), format!("w{i}")]).collect()
}

/// One row per class: id, geodesic flag, ordering, λ, U, residual, index,
/// nullity, then `x, y, w` for each body.
pub fn census_csv(records: &[CCRecord]) -> Result<String> {
    let n = records.first().map_or(0, |r| r.configuration.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> =
        ["class_id", "is_geodesic", "ordering", "lambda", "U", "residual", "index", "nullity"].map(String::from).into();
    header.extend(coordinate_header(n));
    w.write_record(&header).map_err(csv_error)?;
    for (id, r) in records.iter().enumerate() {
        let mut row = vec![
            id.to_string(),
            r.is_geodesic.to_string(),
            r.ordering.as_ref().map(|o| o.to_string()).unwrap_or_default(),
            format_f64(r.lambda),
            format_f64(r.u_value),
            format_f64(r.residual),
            r.index().to_string(),
            r.nullity().to_string(),
        ];
        row.extend(r.configuration.points().iter().flat_map(|p| [p.x, p.y, p.w]).map(format_f64));
        w.write_record(&row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CcError::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

/// Generic CSV from a header and stringified rows.
pub fn rows_csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CcError::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

fn csv_error(e: csv::Error) -> CcError {
    CcError::Parse(e.to_string())
}
