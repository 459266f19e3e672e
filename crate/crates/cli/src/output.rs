//! Output files and their provenance stamp.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Identifies the exact inputs of a run. Embedded in every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: &'static str,
}

impl Provenance {
    /// Hashes the command name, its parameters and the parsed contents of
    /// every input file. Paths are deliberately left out so that moving a
    /// config does not change its identity.
    ///
    /// `serde_json` maps keep keys sorted, so the serialized form is
    /// canonical.
    pub fn new(command: &str, params: Value, inputs: Value, seed: u64) -> Self {
        let canonical = serde_json::json!({
            "command": command,
            "params": params,
            "inputs": inputs,
            "seed": seed,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        Self {
            config_hash: hex::encode(digest),
            seed,
            tool_version: TOOL_VERSION,
        }
    }

    fn csv_comment(&self) -> String {
        format!(
            "# config_hash={},seed={},tool_version={}\n",
            self.config_hash, self.seed, self.tool_version
        )
    }
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes `payload`'s fields next to the provenance fields as one JSON
/// object.
pub fn write_json(path: &Path, provenance: &Provenance, payload: &impl Serialize) -> CliResult<()> {
    let text = render_json(provenance, payload)?;
    write(path, &text)
}

pub fn render_json(provenance: &Provenance, payload: &impl Serialize) -> CliResult<String> {
    let to_map = |v: Value| match v {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::Config("payload must serialize to an object".into())),
    };
    let mut map: Map<String, Value> = to_map(serde_json::to_value(provenance).expect("provenance serializes"))?;
    let payload = serde_json::to_value(payload).map_err(|e| CliError::Config(e.to_string()))?;
    map.extend(to_map(payload)?);
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("json value serializes");
    text.push('\n');
    Ok(text)
}

/// CSV with a provenance comment line, a header and pre-formatted rows.
pub fn write_csv(
    path: &Path,
    provenance: &Provenance,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> CliResult<()> {
    let mut text = provenance.csv_comment();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write(path, &text)
}

/// Full-precision float formatting for CSV cells (17 significant digits).
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}
