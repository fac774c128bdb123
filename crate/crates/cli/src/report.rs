use std::fmt;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use toklens_core::report::sig6;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Why a run failed. Usage failures exit with 1, data failures with 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data { code: &'static str, message: String },
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure::Usage(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data { .. } => 2,
        }
    }

    pub fn in_file(self, path: &Path) -> Self {
        match self {
            Failure::Data { code, message } => Failure::Data {
                code,
                message: format!("{}: {message}", path.display()),
            },
            usage => usage,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: usage: {m}"),
            Failure::Data { code, message } => write!(f, "error: {code}: {message}"),
        }
    }
}

impl From<toklens_core::Error> for Failure {
    fn from(e: toklens_core::Error) -> Self {
        Failure::Data {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// Reads input files and hashes their contents in read order.
#[derive(Default)]
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn bytes(&mut self, path: &Path) -> Outcome<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| Failure::Data {
            code: "io",
            message: format!("{}: {e}", path.display()),
        })?;
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(&bytes);
        Ok(bytes)
    }

    pub fn text(&mut self, path: &Path) -> Outcome<String> {
        let bytes = self.bytes(path)?;
        toklens_core::corpus::decode_utf8(bytes).map_err(|e| Failure::from(e).in_file(path))
    }

    /// Applies a parser to a file's contents, naming the file in any error.
    pub fn parse<T>(&mut self, path: &Path, f: impl FnOnce(&[u8]) -> toklens_core::Result<T>) -> Outcome<T> {
        let bytes = self.bytes(path)?;
        f(&bytes).map_err(|e| Failure::from(e).in_file(path))
    }

    pub fn digest(&self) -> String {
        format!("sha256:{}", hex::encode(self.hasher.clone().finalize()))
    }
}

/// What a command produces before it is written out.
pub enum Output {
    Report { command: &'static str, body: Value, csv: Option<Vec<u8>> },
    Raw(Vec<u8>),
}

impl Output {
    pub fn report(command: &'static str, body: Value) -> Self {
        Output::Report { command, body, csv: None }
    }

    pub fn with_csv(self, rows: Vec<u8>) -> Self {
        match self {
            Output::Report { command, body, .. } => Output::Report { command, body, csv: Some(rows) },
            raw => raw,
        }
    }
}

/// JSON report: provenance header followed by the command's fields.
pub fn envelope(command: &str, digest: &str, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("tool_version".into(), TOOL_VERSION.into());
    map.insert("command".into(), command.into());
    map.insert("inputs_digest".into(), digest.into());
    match body {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("result".into(), other);
        }
    }
    Value::Object(map)
}

pub fn to_json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s.into_bytes()
}

fn cell(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) if n.is_f64() => n.as_f64().map(sig6),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// CSV from a list of flat JSON objects sharing the keys of the first one.
pub fn rows_csv(rows: &[Value]) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let Some(Value::Object(first)) = rows.first() else {
        return Ok(Vec::new());
    };
    let keys: Vec<&String> = first.keys().collect();
    w.write_record(&keys).map_err(toklens_core::Error::from)?;
    for row in rows {
        let record = keys
            .iter()
            .map(|k| cell(row.get(k.as_str()).unwrap_or(&Value::Null)))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Failure::usage("report has nested fields and cannot be written as csv"))?;
        w.write_record(&record).map_err(toklens_core::Error::from)?;
    }
    w.into_inner()
        .map_err(|e| Failure::from(toklens_core::Error::Io(e.into_error())))
}
