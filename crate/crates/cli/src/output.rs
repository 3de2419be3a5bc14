use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::OutputArgs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

pub const MANIFEST_SCHEMA: &str = "spinwit.manifest/1";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs outside the model's domain (exit 2).
    Usage(String),
    /// Checks ran and at least one failed, or output could not be written (exit 1).
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Failed(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<spin_witness::Error> for CliError {
    fn from(e: spin_witness::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Command result: rows for CSV, an optional richer object for JSON, and
/// whether every check passed.
pub struct Report {
    pub schema: &'static str,
    pub rows: Vec<Value>,
    pub object: Option<Value>,
    pub default_format: Format,
    pub failure: Option<CliError>,
}

impl Report {
    pub fn from_rows<T: Serialize>(schema: &'static str, rows: &[T]) -> CliResult<Self> {
        let rows = rows.iter().map(to_value).collect::<CliResult<_>>()?;
        Ok(Report {
            schema,
            rows,
            object: None,
            default_format: Format::Csv,
            failure: None,
        })
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Csv => render_csv(&self.rows),
            Format::Json => {
                let mut top = Map::new();
                top.insert("schema".into(), Value::from(self.schema));
                match &self.object {
                    Some(Value::Object(fields)) => top.extend(fields.clone()),
                    Some(other) => {
                        top.insert("result".into(), other.clone());
                    }
                    None => {
                        top.insert("rows".into(), Value::Array(self.rows.clone()));
                    }
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(top)).map_err(fail)?;
                s.push('\n');
                Ok(s)
            }
        }
    }

    pub fn emit(
        self,
        command: &str,
        params: &impl Serialize,
        seed: Option<u64>,
        out: &OutputArgs,
    ) -> CliResult<ExitCode> {
        let format = out.format.unwrap_or(self.default_format);
        let text = self.render(format)?;
        match &out.out {
            Some(path) => {
                fs::write(path, &text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
                let manifest = manifest(command, params, seed, (self.schema, format), path, &text)?;
                let mpath = manifest_path(path);
                fs::write(&mpath, manifest).map_err(|e| CliError::Failed(format!("{}: {e}", mpath.display())))?;
            }
            None => print!("{text}"),
        }
        match self.failure {
            Some(e) => Err(e),
            None => Ok(ExitCode::SUCCESS),
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(fail)
}

fn fail(e: impl fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn render_csv(rows: &[Value]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(Value::Object(first)) = rows.first() {
        w.write_record(first.keys()).map_err(fail)?;
    }
    for row in rows {
        let Value::Object(fields) = row else {
            return Err(CliError::Failed("CSV rows must be objects".into()));
        };
        w.write_record(fields.values().map(cell)).map_err(fail)?;
    }
    String::from_utf8(w.into_inner().map_err(fail)?).map_err(fail)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(_) | Value::Bool(_) | Value::Array(_) | Value::Object(_) => v.to_string(),
    }
}

/// `results.csv` -> `results.csv.manifest.json`
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn manifest(
    command: &str,
    params: &impl Serialize,
    seed: Option<u64>,
    (schema, format): (&str, Format),
    path: &Path,
    text: &str,
) -> CliResult<String> {
    let m = json!({
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "params": to_value(params)?,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "output": path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "output_schema": schema,
        "format": format,
        "sha256": sha256_hex(text.as_bytes()),
    });
    let mut s = serde_json::to_string_pretty(&m).map_err(fail)?;
    s.push('\n');
    Ok(s)
}
