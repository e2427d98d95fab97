//! Report files with embedded configuration echoes, and deterministic
//! replay.
//!
//! Every run writes either JSON ({version, config, payload}) or CSV
//! (# version / # config comment lines, then the data). Replay parses
//! the config echo, re-executes the run in memory, and compares the
//! regenerated payload bytes with the stored ones.

use anyhow::{bail, Context, Result};
use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct JsonReport {
    pub config: Value,
    pub payload: Value,
}

impl JsonReport {
    pub fn render(&self) -> String {
        let doc = serde_json::json!({
            "version": VERSION,
            "config": self.config,
            "payload": self.payload,
        });
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }
}

pub struct CsvReport {
    pub config: Value,
    pub header: String,
    pub rows: Vec<String>,
}

impl CsvReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# version: {VERSION}\n"));
        out.push_str(&format!(
            "# config: {}\n",
            serde_json::to_string(&self.config).expect("config serializes")
        ));
        out.push_str(&self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }
}

pub struct StoredReport {
    pub version: String,
    pub config: Value,
    /// The numeric payload as rendered bytes: JSON payload text or CSV
    /// data lines.
    pub payload_text: String,
}

pub fn parse_report(text: &str) -> Result<StoredReport> {
    if text.trim_start().starts_with('{') {
        let doc: Value = serde_json::from_str(text).context("malformed JSON report")?;
        let version = doc["version"]
            .as_str()
            .context("report missing version")?
            .to_string();
        let config = doc
            .get("config")
            .cloned()
            .context("report missing config echo")?;
        let payload = doc
            .get("payload")
            .cloned()
            .context("report missing payload")?;
        Ok(StoredReport {
            version,
            config,
            payload_text: serde_json::to_string_pretty(&payload).unwrap(),
        })
    } else {
        let mut version = None;
        let mut config = None;
        let mut payload = String::new();
        for line in text.lines() {
            if let Some(v) = line.strip_prefix("# version: ") {
                version = Some(v.trim().to_string());
            } else if let Some(c) = line.strip_prefix("# config: ") {
                config = Some(serde_json::from_str(c).context("malformed config echo")?);
            } else {
                payload.push_str(line);
                payload.push('\n');
            }
        }
        let Some(version) = version else {
            bail!("CSV report missing version line");
        };
        let Some(config) = config else {
            bail!("CSV report missing config echo");
        };
        Ok(StoredReport {
            version,
            config,
            payload_text: payload,
        })
    }
}
