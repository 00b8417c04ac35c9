//! JSON documents: manifests, predictions, metrics and stats reports.
//!
//! Writers emit pretty-printed JSON with a trailing newline; key order is the
//! declaration order of the serialized types, so output is stable.

use pcx_core::expansion::{DatasetStats, ExpansionManifest};
use pcx_core::metrics::{MetricsReport, PredictedInstance};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn to_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::SchemaViolation {
        path: "$".into(),
        message: e.to_string(),
    })?;
    out.push(b'\n');
    Ok(out)
}

/// Deserializes `bytes`, reporting failures with the JSON path of the
/// offending value.
pub fn from_slice<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| Error::SchemaViolation {
        path: json_path(&e.path().to_string()),
        message: e.into_inner().to_string(),
    })
}

fn json_path(p: &str) -> String {
    match p {
        "." | "" => "$".into(),
        p if p.starts_with('[') => format!("${p}"),
        p => format!("$.{p}"),
    }
}

fn check_manifest(m: &ExpansionManifest) -> Result<()> {
    match m.validate().into_iter().next() {
        None => Ok(()),
        Some(v) => Err(Error::SchemaViolation {
            path: v.path,
            message: v.message,
        }),
    }
}

pub fn write_manifest(m: &ExpansionManifest) -> Result<Vec<u8>> {
    check_manifest(m)?;
    to_pretty(m)
}

pub fn read_manifest(bytes: &[u8]) -> Result<ExpansionManifest> {
    let m = from_slice(bytes)?;
    check_manifest(&m)?;
    Ok(m)
}

pub fn read_predictions(bytes: &[u8]) -> Result<Vec<PredictedInstance>> {
    from_slice(bytes)
}

pub fn write_predictions(preds: &[PredictedInstance]) -> Result<Vec<u8>> {
    to_pretty(&preds)
}

pub fn write_report(report: &MetricsReport) -> Result<Vec<u8>> {
    to_pretty(report)
}

pub fn write_stats(stats: &DatasetStats) -> Result<Vec<u8>> {
    to_pretty(stats)
}
