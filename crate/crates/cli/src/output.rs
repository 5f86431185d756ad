use crate::args::Format;
use crate::error::CliError;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// SHA-256 digests of every file a command read, in read order.
#[derive(Debug, Default, Serialize)]
pub struct Inputs(Vec<InputDigest>);

#[derive(Debug, Serialize)]
struct InputDigest {
    path: PathBuf,
    sha256: String,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        self.0.push(InputDigest { path: path.to_path_buf(), sha256: sha256_hex(text.as_bytes()) });
        Ok(text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// What a command produced, renderable in every output format.
pub struct Output {
    pub result: Value,
    /// Dedicated CSV rendering; otherwise `rows` or the scalar fields of `result`.
    pub csv: Option<String>,
    pub rows: Option<Vec<Value>>,
    pub text: String,
}

impl Output {
    pub fn new(result: impl Serialize, text: String) -> Self {
        Output { result: serde_json::to_value(result).expect("serializable result"), csv: None, rows: None, text }
    }

    pub fn with_rows(mut self, rows: Vec<Value>) -> Self {
        self.rows = Some(rows);
        self
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    /// Renders the output. JSON wraps the result with the tool version, the full
    /// configuration and the input digests.
    pub fn render(self, format: Format, config: &impl Serialize, inputs: &Inputs) -> Result<String, CliError> {
        match format {
            Format::Json => {
                let doc = json!({
                    "tool": "qcs",
                    "version": env!("CARGO_PKG_VERSION"),
                    "config": config,
                    "inputs": inputs,
                    "result": self.result,
                });
                Ok(serde_json::to_string_pretty(&doc).expect("json") + "\n")
            }
            Format::Text => Ok(self.text),
            Format::Csv => match (self.csv, self.rows) {
                (Some(csv), _) => Ok(csv),
                (None, Some(rows)) => rows_csv(&rows),
                (None, None) => rows_csv(&[scalar_fields(&self.result)]),
            },
        }
    }
}

fn scalar_fields(v: &Value) -> Value {
    let fields: Map<String, Value> = v.as_object().map(|m| m.iter().filter(|(_, x)| !x.is_object() && !x.is_array()).map(|(k, x)| (k.clone(), x.clone())).collect()).unwrap_or_default();
    Value::Object(fields)
}

/// CSV with one column per key of the first row.
pub fn rows_csv(rows: &[Value]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let Some(first) = rows.first().and_then(Value::as_object) else {
        return Ok(String::new());
    };
    let keys: Vec<&String> = first.keys().collect();
    let cell = |v: Option<&Value>| match v {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Null) | None => String::new(),
        Some(x) => x.to_string(),
    };
    let csv_err = |e: csv::Error| CliError::Domain(format!("csv: {e}"));
    w.write_record(&keys).map_err(csv_err)?;
    for r in rows {
        w.write_record(keys.iter().map(|k| cell(r.get(k.as_str())))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Domain(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

pub fn write(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|source| CliError::Write { path: path.to_path_buf(), source }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
