use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use super::{TraceGraph, TRACE_RULE};
use crate::model::{names, Megamodel, Origin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("unsupported format `{0}` (expected `dot` or `json`)")]
    UnsupportedFormat(String),
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<ExportFormat, ExportError> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            _ => Err(ExportError::UnsupportedFormat(s.to_string())),
        }
    }
}

/// Export the model and its traces. Prelude elements are omitted unless
/// `include_prelude` is set.
pub fn export_graph(model: &Megamodel, traces: &[TraceGraph], format: ExportFormat, include_prelude: bool) -> String {
    let value = graph_json(model, traces, include_prelude);
    match format {
        ExportFormat::Json => value.to_string(),
        ExportFormat::Dot => dot(model, &value),
    }
}

fn graph_json(model: &Megamodel, traces: &[TraceGraph], include_prelude: bool) -> Value {
    let canonical = model.to_canonical_json(include_prelude);
    let entities: Vec<Value> = canonical["entities"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|e| json!({"name": e["name"], "type": e["type"], "origin": e["origin"]}))
        .collect();
    let mut statements: Vec<Value> = canonical["relationships"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|r| json!({"kind": "relationship", "subject": r["subject"], "predicate": r["predicate"], "object": r["object"], "origin": r["origin"]}))
        .collect();
    statements.extend(canonical["applications"].as_array().into_iter().flatten().map(|a| {
        json!({"kind": "application", "subject": a["input"], "predicate": a["function"], "object": a["output"], "origin": a["origin"]})
    }));
    let traces: Vec<Value> = traces.iter().map(TraceGraph::to_json).collect();
    json!({"entities": entities, "statements": statements, "traces": traces})
}

fn dot_id(name: &str) -> String {
    let plain = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

fn shape(model: &Megamodel, entity: &str) -> &'static str {
    let is = |ty| model.is_a(entity, ty);
    if is(names::PLUGIN) {
        "component"
    } else if is(names::ARTIFACT) {
        "note"
    } else if is(names::LANGUAGE) {
        "ellipse"
    } else if is(names::TECHNOLOGY) {
        "box3d"
    } else if is(names::CONCEPT) {
        "diamond"
    } else {
        "box"
    }
}

fn dot(model: &Megamodel, graph: &Value) -> String {
    let trace_origin = Origin::inferred(TRACE_RULE).to_string();
    let mut out = String::from("digraph megamodel {\n");
    for e in graph["entities"].as_array().into_iter().flatten() {
        let name = e["name"].as_str().unwrap_or_default();
        let _ = writeln!(out, "  {} [shape={}];", dot_id(name), shape(model, name));
    }
    for s in graph["statements"].as_array().into_iter().flatten() {
        let text = |k: &str| s[k].as_str().unwrap_or_default().to_string();
        let style = if text("origin") == trace_origin { ", style=dashed" } else { "" };
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"{style}];",
            dot_id(&text("subject")),
            dot_id(&text("object")),
            text("predicate").replace('"', "\\\"")
        );
    }
    out.push_str("}\n");
    out
}
