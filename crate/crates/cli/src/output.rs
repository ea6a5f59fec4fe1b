use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crystalwalk::json;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Command;

pub const SCHEMA: &str = "crystalwalk/1";

/// Everything a report carries besides its result.
pub struct Envelope<'a> {
    pub command: &'a Command,
    pub started: Instant,
    pub graph: Option<Value>,
}

impl Envelope<'_> {
    fn config(&self) -> Value {
        // Externally tagged: `{"<command>": {...flags}}`.
        let tagged = serde_json::to_value(self.command).expect("arguments serialize");
        tagged
            .as_object()
            .and_then(|o| o.values().next().cloned())
            .unwrap_or(Value::Null)
    }

    pub fn json<T: Serialize>(&self, result: &T) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command.name(),
            "version": crystalwalk::VERSION,
            "config": self.config(),
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "graph": self.graph,
            "result": result,
        })
    }

    /// Comment lines put in front of CSV output.
    pub fn csv_preamble(&self) -> String {
        format!(
            "# schema: {SCHEMA}\n# command: {}\n# version: {}\n# config: {}\n# wall_time_s: {}\n",
            self.command.name(),
            crystalwalk::VERSION,
            self.config(),
            json::format_f64(self.started.elapsed().as_secs_f64()),
        )
    }
}

pub fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}

pub fn write_json(path: Option<&Path>, value: &Value) -> io::Result<()> {
    let mut text = json::to_string(value).map_err(io::Error::other)?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// CSV text with the given header and rows; floats at 17 significant digits.
pub fn csv_text(
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

pub fn float(v: f64) -> String {
    if v.is_finite() {
        json::format_f64(v)
    } else {
        String::new()
    }
}

/// `dir/stem.edges.csv` next to `points`.
pub fn companion(points: &Path) -> PathBuf {
    let stem = points
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("realization");
    points.with_file_name(format!("{stem}.edges.csv"))
}

pub fn coordinate_names(d: usize) -> Vec<String> {
    (0..d)
        .map(|k| match (d, k) {
            (..=3, 0) => "x".to_string(),
            (..=3, 1) => "y".to_string(),
            (..=3, 2) => "z".to_string(),
            _ => format!("x{}", k + 1),
        })
        .collect()
}
