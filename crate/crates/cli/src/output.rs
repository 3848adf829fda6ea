use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use carrier::protocol::sig12;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Rounds every non-integer number to 12 significant digits.
pub fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .map(sig12)
            .and_then(serde_json::Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

fn tagged(kind: &str, value: &impl Serialize) -> io::Result<Map<String, Value>> {
    let mut out = Map::new();
    out.insert("type".into(), Value::String(kind.into()));
    match rounded(serde_json::to_value(value)?) {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("value".into(), other);
        }
    }
    Ok(out)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

enum Target {
    Json(Box<dyn Write>),
    Csv {
        writer: Box<csv::Writer<Box<dyn Write>>>,
        header: Option<Vec<String>>,
    },
}

/// Single writer for a run. JSON output is one object per line, each tagged
/// with `type`; CSV output keeps only data rows.
pub struct Sink {
    target: Target,
}

impl Sink {
    pub fn open(format: Format, path: Option<&Path>) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let target = match format {
            Format::Json => Target::Json(out),
            Format::Csv => Target::Csv {
                writer: Box::new(csv::Writer::from_writer(out)),
                header: None,
            },
        };
        Ok(Self { target })
    }

    /// Header and summary lines; JSON only.
    pub fn meta(&mut self, kind: &str, value: &impl Serialize) -> io::Result<()> {
        if let Target::Json(out) = &mut self.target {
            writeln!(out, "{}", Value::Object(tagged(kind, value)?))?;
            out.flush()?;
        }
        Ok(())
    }

    pub fn row(&mut self, kind: &str, value: &impl Serialize) -> io::Result<()> {
        match &mut self.target {
            Target::Json(_) => self.meta(kind, value),
            Target::Csv { writer, header } => {
                let Value::Object(m) = rounded(serde_json::to_value(value)?) else {
                    return Err(io::Error::other("CSV rows must be objects"));
                };
                let keys = header.get_or_insert_with(|| {
                    let keys: Vec<String> = m.keys().cloned().collect();
                    let _ = writer.write_record(&keys);
                    keys
                });
                let cells: Vec<String> = keys.iter().map(|k| m.get(k).map(cell).unwrap_or_default()).collect();
                writer.write_record(&cells)?;
                writer.flush()
            }
        }
    }

    pub fn finish(self) -> io::Result<()> {
        match self.target {
            Target::Json(mut out) => out.flush(),
            Target::Csv { mut writer, .. } => writer.flush(),
        }
    }
}
