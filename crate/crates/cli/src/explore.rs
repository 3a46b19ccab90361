//! The exploration index: an editor-neutral view of a pipeline run with
//! declaration spans, binding resolutions, fragment children, statement
//! statuses and trace links.

use serde_json::{json, Value};

use megal_core::model::{Origin, PRELUDE_NAME};
use megal_core::pipeline::PipelineRun;
use megal_core::resolver::BindingState;
use megal_core::syntax::SourceSpan;
use megal_core::trace::TRACE_RULE;

fn span(span: &Option<SourceSpan>) -> Value {
    match span {
        Some(s) => json!({"file": s.file, "line": s.line, "column": s.column, "length": s.length}),
        None => Value::Null,
    }
}

fn from_prelude(run: &PipelineRun, origin: &Origin, name: &str) -> bool {
    match origin {
        Origin::Imported { module } => module == PRELUDE_NAME,
        Origin::Reflected => run.model.is_prelude_type(name),
        _ => false,
    }
}

fn bindings(run: &PipelineRun, entity: &str) -> Vec<Value> {
    let resolved = run.bindings.bindings(entity);
    run.model
        .bindings_of(entity)
        .map(|b| {
            let state = resolved.iter().find(|r| r.uri == b.uri).map(|r| &r.state);
            let (objects, children, error) = match state {
                Some(BindingState::Resolved(objects)) => {
                    let children: Vec<String> =
                        objects.iter().flat_map(|o| run.workspace.children(o)).map(|c| c.segment.to_string()).collect();
                    (objects.iter().map(|o| o.identity.clone()).collect::<Vec<_>>(), children, None)
                }
                Some(BindingState::Failed(e)) => (Vec::new(), Vec::new(), Some(e.to_string())),
                None => (Vec::new(), Vec::new(), None),
            };
            let resolved_path = match objects.as_slice() {
                [only] => Value::String(only.clone()),
                _ => Value::Null,
            };
            json!({
                "uri": b.uri,
                "resolvedPath": resolved_path,
                "objects": objects,
                "children": children,
                "error": error,
            })
        })
        .collect()
}

/// Build the index. Prelude entities are omitted unless `include_prelude`.
pub fn index(run: &PipelineRun, include_prelude: bool) -> Value {
    let mut entities: Vec<Value> = run
        .model
        .entities()
        .filter(|e| include_prelude || !from_prelude(run, &e.origin, &e.name))
        .map(|e| {
            json!({
                "name": e.name,
                "type": e.ty,
                "origin": e.origin,
                "declSpan": span(&e.span),
                "bindings": bindings(run, &e.name),
            })
        })
        .collect();
    entities.sort_by(|a, b| a["name"].as_str().cmp(&b["name"].as_str()));

    let mut statements: Vec<Value> = Vec::new();
    for rel in run.model.relationships() {
        if !include_prelude && from_prelude(run, &rel.origin, "") {
            continue;
        }
        let result = run.report.find(&rel.subject, &rel.predicate, &rel.object);
        let traced = rel.origin.is_inferred_by(TRACE_RULE);
        statements.push(json!({
            "subject": rel.subject,
            "predicate": rel.predicate,
            "object": rel.object,
            "origin": rel.origin,
            "span": span(&rel.span),
            "status": if traced { Value::Null } else { json!(result.map(|r| r.status)) },
            "messages": result.filter(|_| !traced).map(|r| json!(r.messages)).unwrap_or(json!([])),
        }));
    }
    for app in run.model.applications() {
        if !include_prelude && from_prelude(run, &app.origin, "") {
            continue;
        }
        let result = run.report.find(&app.input, &app.function, &app.output);
        statements.push(json!({
            "subject": app.input,
            "predicate": app.function,
            "object": app.output,
            "origin": app.origin,
            "span": span(&app.span),
            "status": result.map(|r| r.status),
            "messages": result.map(|r| json!(r.messages)).unwrap_or(json!([])),
        }));
    }
    statements
        .sort_by_key(|s| ["subject", "predicate", "object"].map(|k| s[k].as_str().unwrap_or_default().to_string()));

    let traces: Vec<Value> = run.traces.iter().map(|t| t.to_json()).collect();
    json!({"entities": entities, "statements": statements, "traces": traces})
}
