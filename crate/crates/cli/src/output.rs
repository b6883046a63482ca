//! Output files: a `#`-prefixed provenance header followed by CSV, and a
//! JSON sidecar carrying the same provenance fields first.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, BUILD_ID, SCHEMA_VERSION};

/// Everything a command produces. `failure` names a numerical check that
/// failed; the outputs are still written.
pub struct Report {
    pub csv: String,
    pub sidecar: Option<serde_json::Value>,
    pub failure: Option<String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    command: &'a str,
    build: &'a str,
    seed: u64,
    config: &'a serde_json::Value,
    result: &'a serde_json::Value,
}

pub struct Provenance {
    pub command: &'static str,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &'static str, seed: u64, config: &impl Serialize) -> Result<Self, CliError> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Numerical(e.to_string()))?;
        Ok(Self { command, seed, config })
    }

    pub fn header(&self) -> String {
        format!(
            "# mereo {}\n# schema_version: {SCHEMA_VERSION}\n# build: {BUILD_ID}\n# seed: {}\n# config: {}\n",
            self.command, self.seed, self.config
        )
    }

    pub fn sidecar(&self, result: &serde_json::Value) -> Result<String, CliError> {
        let doc = Sidecar {
            schema_version: SCHEMA_VERSION,
            command: self.command,
            build: BUILD_ID,
            seed: self.seed,
            config: &self.config,
            result,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numerical(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }
}

/// Sidecar path next to the CSV: `run.csv` → `run.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Write the CSV to `out` (stdout when absent) and the sidecar next to it.
pub fn emit(prov: &Provenance, report: &Report, out: Option<&Path>) -> Result<(), CliError> {
    let body = format!("{}{}", prov.header(), report.csv);
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            if let Some(result) = &report.sidecar {
                std::fs::write(sidecar_path(path), prov.sidecar(result)?)?;
            }
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(body.as_bytes())?;
            if report.sidecar.is_some() {
                eprintln!("note: no --out given, JSON sidecar not written");
            }
        }
    }
    Ok(())
}

/// Serialize rows with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
}
