//! Artifact emission: CSV and JSON writers with a deterministic companion
//! hash over the data payload (metadata such as the timestamp is excluded).

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;

use crate::config::RunConfig;

#[derive(Debug)]
pub struct EmitError(pub String);

impl std::fmt::Display for EmitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for EmitError {}

/// Format a float with 17 significant digits, NaN spelled out for CSV.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(path: &str, bytes: &[u8]) -> Result<(), EmitError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| EmitError(format!("cannot create {path}: {e}")))?;
    f.write_all(bytes)
        .map_err(|e| EmitError(format!("cannot write {path}: {e}")))
}

fn write_hash(out_path: &str, payload: &[u8]) -> Result<(), EmitError> {
    let hash_path = format!("{out_path}.hash");
    write_file(&hash_path, format!("{}\n", sha256_hex(payload)).as_bytes())
}

/// Write a CSV artifact: UTF-8, header row, one line per record, plus a
/// `.hash` companion over the whole file. An empty record list yields a
/// header-only file.
pub fn emit_csv(path: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), EmitError> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_file(path, text.as_bytes())?;
    write_hash(path, text.as_bytes())
}

/// Describe the build for provenance metadata.
fn generator_version() -> String {
    let described = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .filter(|s| !s.is_empty());
    described.unwrap_or_else(|| "unknown".to_string())
}

fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Write a JSON artifact `{metadata: {generator, config, timestamp}, data}`
/// plus a `.hash` companion computed over the data payload only, so
/// repeated runs with the same config hash identically.
pub fn emit_json<T: Serialize>(
    path: &str,
    config: &RunConfig,
    data: &T,
) -> Result<(), EmitError> {
    let data_value =
        serde_json::to_value(data).map_err(|e| EmitError(format!("serialize data: {e}")))?;
    let document = serde_json::json!({
        "metadata": {
            "generator": generator_version(),
            "config": config,
            "timestamp": unix_timestamp(),
        },
        "data": data_value,
    });
    let text = serde_json::to_string_pretty(&document)
        .map_err(|e| EmitError(format!("serialize document: {e}")))?;
    write_file(path, format!("{text}\n").as_bytes())?;
    let data_text = serde_json::to_string(&data_value)
        .map_err(|e| EmitError(format!("serialize data: {e}")))?;
    write_hash(path, data_text.as_bytes())
}
