use std::path::{Path, PathBuf};

use afrelay::montecarlo::{ExperimentConfig, OutageCurve, OutagePoint};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of the resolved config serialized as JSON with sorted keys.
///
/// Formatting, key order and comments of the source file never reach the
/// digest, and neither does the difference between a grid given as a list or
/// as a range.
pub fn config_digest(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(canonical_json(cfg).as_bytes()))
}

fn canonical_json(cfg: &ExperimentConfig) -> String {
    let value = serde_json::to_value(cfg).expect("config serializes");
    serde_json::to_string(&sort_keys(value)).expect("json value serializes")
}

fn sort_keys(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Pretty JSON with keys in sorted order.
pub fn to_stable_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&sort_keys(v)).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// The JSON companion of an outage CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveDocument {
    pub config: ExperimentConfig,
    pub config_digest: String,
    pub points: Vec<OutagePoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub workers: Option<usize>,
    pub outputs: Vec<PathBuf>,
}

pub fn write_curve_csv(path: &Path, curve: &OutageCurve) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for p in &curve.points {
        w.serialize(p).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv(path: &Path) -> Result<OutageCurve, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let points = r
        .deserialize()
        .collect::<Result<Vec<OutagePoint>, _>>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(OutageCurve { points })
}

/// `<dir>/<stem>.json` next to a curve CSV, if present.
pub fn companion_json(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn read_curve_document(path: &Path) -> Result<CurveDocument, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
