use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::{EdgeSpec, QuotientGraph};
use crate::error::{Error, Result};

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Parse a probability literal: a decimal number or a rational `a/b`.
///
/// `a/b` is evaluated as a single IEEE division of two integers, so the
/// result is the correctly rounded value whenever `|a|, |b| < 2⁵³`.
pub fn parse_probability(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let a: i64 = a
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {text:?}"))?;
        let b: i64 = b
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {text:?}"))?;
        if b == 0 {
            return Err(format!("zero denominator in {text:?}"));
        }
        Ok(a as f64 / b as f64)
    } else {
        text.parse::<f64>()
            .map_err(|_| format!("not a number: {text:?}"))
    }
}

fn field<'a>(obj: &'a Value, key: &str, loc: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| parse_err(loc, format!("missing field `{key}`")))
}

fn string(v: &Value, loc: &str) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| parse_err(loc, "expected a string"))
}

/// Parse a quotient-graph document.
pub fn load_graph_str(text: &str) -> Result<QuotientGraph> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        parse_err(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    if !doc.is_object() {
        return Err(parse_err("document", "expected a JSON object"));
    }
    let dim = field(&doc, "dim", "dim")?
        .as_u64()
        .filter(|&d| d > 0)
        .ok_or_else(|| parse_err("dim", "expected a positive integer"))? as usize;

    let vertices = field(&doc, "vertices", "vertices")?
        .as_array()
        .ok_or_else(|| parse_err("vertices", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| string(v, &format!("vertices[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    let raw_edges = field(&doc, "edges", "edges")?
        .as_array()
        .ok_or_else(|| parse_err("edges", "expected an array"))?;
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (i, e) in raw_edges.iter().enumerate() {
        let loc = |f: &str| format!("edges[{i}].{f}");
        let translation = field(e, "translation", &loc("translation"))?
            .as_array()
            .ok_or_else(|| parse_err(loc("translation"), "expected an array of integers"))?
            .iter()
            .map(|t| {
                t.as_i64()
                    .ok_or_else(|| parse_err(loc("translation"), "expected an integer"))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = match field(e, "p", &loc("p"))? {
            Value::Number(x) => x
                .as_f64()
                .ok_or_else(|| parse_err(loc("p"), "not representable"))?,
            Value::String(s) => parse_probability(s).map_err(|m| parse_err(loc("p"), m))?,
            _ => {
                return Err(parse_err(
                    loc("p"),
                    "expected a number or a rational string",
                ))
            }
        };
        edges.push(EdgeSpec {
            id: string(field(e, "id", &loc("id"))?, &loc("id"))?,
            from: string(field(e, "from", &loc("from"))?, &loc("from"))?,
            to: string(field(e, "to", &loc("to"))?, &loc("to"))?,
            translation,
            p,
            inverse: string(field(e, "inverse", &loc("inverse"))?, &loc("inverse"))?,
        });
    }
    QuotientGraph::new(dim, vertices, edges)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<QuotientGraph> {
    load_graph_str(&fs::read_to_string(path)?)
}

#[derive(Serialize)]
struct EdgeDoc<'a> {
    id: &'a str,
    from: &'a str,
    to: &'a str,
    translation: &'a [i64],
    p: f64,
    inverse: &'a str,
}

#[derive(Serialize)]
struct GraphDoc<'a> {
    dim: usize,
    vertices: &'a [String],
    edges: Vec<EdgeDoc<'a>>,
}

/// The document form of `g` as a JSON value.
pub fn graph_value(g: &QuotientGraph) -> Value {
    let text = save_graph_string(g);
    serde_json::from_str(&text).expect("serialized graph parses")
}

pub fn save_graph_string(g: &QuotientGraph) -> String {
    let edges = g
        .edges()
        .iter()
        .map(|e| EdgeDoc {
            id: &e.id,
            from: &g.vertices()[e.origin],
            to: &g.vertices()[e.terminus],
            translation: &e.translation,
            p: e.probability,
            inverse: &g.edges()[e.inverse].id,
        })
        .collect();
    let doc = GraphDoc {
        dim: g.dim(),
        vertices: g.vertices(),
        edges,
    };
    crate::json::to_string(&doc).expect("graph serializes")
}

pub fn save_graph(g: &QuotientGraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, save_graph_string(g) + "\n")?;
    Ok(())
}
