//! External analyses over a line-based JSON protocol. One process is spawned
//! per request; the request is written as one line on stdin and the first
//! non-empty stdout line is the response.
//!
//! ```text
//! request:  {"kind":"applicable"|"evaluate",
//!            "relationship":{"subject":..,"predicate":..,"object":..},
//!            "artifacts":{"<entity>":{"uri":..,"contentBase64":..}}}
//! response: {"applicable":true|false}
//!           {"status":"satisfied"|"violated","messages":[..]}
//! ```
//!
//! A message is a string or an object `{"severity","text","fragment"}`; an
//! object with `"kind":"link"` and `left`/`right` entity names contributes a
//! trace link instead.

use base64::Engine;
use serde_json::{json, Map, Value};

use super::{EvalContext, EvalReport, Evaluator, Link, Message, Statement, Verdict};
use crate::config::PluginSpec;
use crate::diagnostics::Severity;
use crate::process::{run_command, ProcessError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error("plugin exited with {}: {stderr}", code.map_or("a signal".to_string(), |c| format!("status {c}")))]
    Exit { code: Option<i32>, stderr: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

pub struct ExternalEvaluator {
    name: String,
    spec: PluginSpec,
}

impl ExternalEvaluator {
    pub fn new(name: &str, spec: PluginSpec) -> ExternalEvaluator {
        ExternalEvaluator { name: name.to_string(), spec }
    }

    fn artifact(ctx: &EvalContext<'_>, entity: &str) -> Value {
        let mut entry = Map::new();
        let uri = ctx.model.bindings_of(entity).next().map(|b| Value::String(b.uri.clone()));
        entry.insert("uri".into(), uri.unwrap_or(Value::Null));
        let objects = ctx.bindings.objects(entity);
        if let [object] = objects.as_slice() {
            if let Some(bytes) = object.bytes() {
                let encoded = base64::engine::general_purpose::STANDARD.encode(&bytes[..]);
                entry.insert("contentBase64".into(), Value::String(encoded));
            }
        }
        Value::Object(entry)
    }

    /// The request line sent for `kind` (`applicable` or `evaluate`).
    pub fn request(kind: &str, stmt: &Statement, ctx: &EvalContext<'_>) -> Value {
        let mut artifacts = Map::new();
        for entity in [&stmt.subject, &stmt.object] {
            artifacts.insert(entity.clone(), Self::artifact(ctx, entity));
        }
        json!({
            "kind": kind,
            "relationship": {"subject": stmt.subject, "predicate": stmt.predicate, "object": stmt.object},
            "artifacts": artifacts,
        })
    }

    fn call(&self, ctx: &EvalContext<'_>, request: &Value) -> Result<Value, ProtocolError> {
        let line = format!("{request}\n");
        let output = run_command(&self.spec.cmd, &ctx.workspace.root, Some(line.as_bytes()), self.spec.timeout())?;
        if !output.success() {
            return Err(ProtocolError::Exit { code: output.code, stderr: output.stderr_excerpt() });
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let first =
            stdout.lines().find(|l| !l.trim().is_empty()).ok_or(ProtocolError::Malformed("empty output".into()))?;
        serde_json::from_str(first).map_err(|e| ProtocolError::Malformed(e.to_string()))
    }

    /// Interpret an `evaluate` response.
    pub fn parse_report(response: &Value) -> Result<EvalReport, ProtocolError> {
        let malformed = |what: &str| ProtocolError::Malformed(what.to_string());
        let verdict = match response.get("status").and_then(Value::as_str) {
            Some("satisfied") => Verdict::Satisfied,
            Some("violated") => Verdict::Violated,
            _ => return Err(malformed("`status` must be \"satisfied\" or \"violated\"")),
        };
        let default_severity = if verdict == Verdict::Violated { Severity::Error } else { Severity::Info };
        let mut messages = Vec::new();
        let mut links = Vec::new();
        let raw = match response.get("messages") {
            None => &Vec::new(),
            Some(Value::Array(items)) => items,
            Some(_) => return Err(malformed("`messages` must be an array")),
        };
        for item in raw {
            match item {
                Value::String(text) => {
                    messages.push(Message { severity: default_severity, text: text.clone(), fragment: None })
                }
                Value::Object(obj) if obj.get("kind").and_then(Value::as_str) == Some("link") => {
                    let side = |k: &str| obj.get(k).and_then(Value::as_str).map(str::to_string);
                    match (side("left"), side("right")) {
                        (Some(left), Some(right)) => links.push(Link { left, right }),
                        _ => return Err(malformed("link message needs `left` and `right`")),
                    }
                }
                Value::Object(obj) => {
                    let text =
                        obj.get("text").and_then(Value::as_str).ok_or_else(|| malformed("message without `text`"))?;
                    let severity = match obj.get("severity").and_then(Value::as_str) {
                        None => default_severity,
                        Some("error") => Severity::Error,
                        Some("warning") => Severity::Warning,
                        Some("info") => Severity::Info,
                        Some(_) => return Err(malformed("unknown message severity")),
                    };
                    let fragment = obj.get("fragment").and_then(Value::as_str).map(str::to_string);
                    messages.push(Message { severity, text: text.to_string(), fragment });
                }
                _ => return Err(malformed("message must be a string or an object")),
            }
        }
        let mut report = match verdict {
            Verdict::Satisfied => EvalReport { verdict, messages, links: Vec::new() },
            Verdict::Violated => EvalReport::violated(messages),
        };
        report.links = links;
        Ok(report)
    }
}

impl Evaluator for ExternalEvaluator {
    fn name(&self) -> &str {
        &self.name
    }

    fn applies_to(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<bool, String> {
        let response = self.call(ctx, &Self::request("applicable", stmt, ctx)).map_err(|e| e.to_string())?;
        response
            .get("applicable")
            .and_then(Value::as_bool)
            .ok_or_else(|| ProtocolError::Malformed("`applicable` must be a boolean".into()).to_string())
    }

    fn evaluate(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<EvalReport, String> {
        let response = self.call(ctx, &Self::request("evaluate", stmt, ctx)).map_err(|e| e.to_string())?;
        Self::parse_report(&response).map_err(|e| e.to_string())
    }
}
