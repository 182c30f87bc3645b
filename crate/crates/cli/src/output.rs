use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Run identification echoed into every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            system: None,
            system_sha256: None,
            horizon: None,
            seed: None,
            samples: None,
            backend: None,
        }
    }

    fn header(&self) -> String {
        let mut out = format!("# rlab {} {}\n", self.command, env!("CARGO_PKG_VERSION"));
        let mut line = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                out.push_str(&format!("# {key}: {v}\n"));
            }
        };
        line("system", self.system.clone());
        line("system_sha256", self.system_sha256.clone());
        line("horizon", self.horizon.map(|h| h.to_string()));
        line("seed", self.seed.map(|s| s.to_string()));
        line("samples", self.samples.map(|s| s.to_string()));
        line("backend", self.backend.clone());
        out
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

/// CSV document: provenance comment lines, a header row, then records.
pub fn csv_document(prov: &Provenance, columns: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| CliError::Usage(format!("csv output failed: {e}"));
    writer.write_record(columns).map_err(wrap)?;
    for row in rows {
        writer.write_record(row).map_err(wrap)?;
    }
    let body = writer.into_inner().map_err(|e| CliError::Usage(format!("csv output failed: {e}")))?;
    Ok(prov.header() + &String::from_utf8_lossy(&body))
}

pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}
