//! Fragment-level traceability for compound `correspondsTo` statements.
//!
//! A trace is a bipartite graph between the parts of the statement's subject
//! and the parts of its object. Links come from the analysis that judged the
//! statement when it reported any, otherwise from name matching. Every link
//! is also published as a fragment-level `correspondsTo` statement.

mod export;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::evaluation::{direct_parts, match_parts, parts_of, Link, VerificationReport};
use crate::model::{names, Element, Megamodel, RelStmt};
use crate::resolver::BindingTable;

pub use export::{export_graph, ExportError, ExportFormat};

/// Provenance rule of statements published by [`derive_traces`].
pub const TRACE_RULE: &str = "trace";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceGraph {
    /// Subject of the owning `correspondsTo` statement; the left root.
    pub subject: String,
    /// Object of the owning `correspondsTo` statement; the right root.
    pub object: String,
    pub links: Vec<Link>,
}

impl TraceGraph {
    pub fn to_json(&self) -> Value {
        let links: Vec<Value> = self.links.iter().map(|l| json!({"left": l.left, "right": l.right})).collect();
        json!({
            "owner": {"subject": self.subject, "predicate": names::CORRESPONDS_TO, "object": self.object},
            "links": links,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub depth: usize,
    pub left: String,
    pub right: String,
}

/// Whether both sides of a statement have parts.
pub fn is_compound(model: &Megamodel, bindings: &BindingTable, subject: &str, object: &str) -> bool {
    !parts_of(model, bindings, subject).is_empty() && !parts_of(model, bindings, object).is_empty()
}

/// Derive a trace for every `correspondsTo` statement not itself published by
/// a trace, and add the links to the model. Part-free statements get empty
/// graphs.
pub fn derive_traces(
    model: &mut Megamodel,
    bindings: &BindingTable,
    report: Option<&VerificationReport>,
) -> Vec<TraceGraph> {
    let owners: Vec<(String, String)> = model
        .relationships_with(names::CORRESPONDS_TO)
        .filter(|r| !r.origin.is_inferred_by(TRACE_RULE))
        .map(|r| (r.subject.clone(), r.object.clone()))
        .collect();
    let mut graphs = Vec::new();
    for (subject, object) in owners {
        let links = if is_compound(model, bindings, &subject, &object) {
            trace_links(model, bindings, report, &subject, &object)
        } else {
            Vec::new()
        };
        for link in &links {
            let stmt = RelStmt::new(
                &link.left,
                names::CORRESPONDS_TO,
                &link.right,
                crate::model::Origin::inferred(TRACE_RULE),
            );
            let _ = model.add(Element::Relationship(stmt));
        }
        graphs.push(TraceGraph { subject, object, links });
    }
    graphs
}

fn trace_links(
    model: &Megamodel,
    bindings: &BindingTable,
    report: Option<&VerificationReport>,
    subject: &str,
    object: &str,
) -> Vec<Link> {
    let reported = report
        .and_then(|r| r.find(subject, names::CORRESPONDS_TO, object))
        .map(|r| r.links.clone())
        .filter(|links| !links.is_empty());
    let candidates = reported.unwrap_or_else(|| match_parts(model, bindings, subject, object).links);
    let left: BTreeSet<String> = parts_of(model, bindings, subject).into_iter().collect();
    let right: BTreeSet<String> = parts_of(model, bindings, object).into_iter().collect();
    let mut seen = BTreeSet::new();
    candidates
        .into_iter()
        .filter(|l| left.contains(&l.left) && right.contains(&l.right))
        .filter(|l| seen.insert(l.clone()))
        .collect()
}

fn uris(model: &Megamodel, entity: &str) -> Vec<String> {
    model.bindings_of(entity).map(|b| b.uri.clone()).collect()
}

fn root_label(model: &Megamodel, entity: &str) -> String {
    let uris = uris(model, entity);
    if uris.is_empty() {
        entity.to_string()
    } else {
        uris.join(", ")
    }
}

/// A fragment's URI relative to its parent's URI when it extends it,
/// otherwise its full URI.
fn fragment_label(model: &Megamodel, parent: &str, part: &str) -> String {
    let Some(uri) = uris(model, part).into_iter().next() else {
        return part.to_string();
    };
    uris(model, parent)
        .iter()
        .find_map(|p| uri.strip_prefix(p.as_str()).filter(|rest| rest.starts_with('/')).map(str::to_string))
        .unwrap_or(uri)
}

/// Rows of the trace table: the two roots first, then the parts of the left
/// root in depth-first order, each with the URIs of its linked fragments.
pub fn render_trace_table(model: &Megamodel, bindings: &BindingTable, graph: &TraceGraph) -> Vec<TraceRow> {
    let mut rows =
        vec![TraceRow { depth: 0, left: root_label(model, &graph.subject), right: root_label(model, &graph.object) }];
    let mut seen = BTreeSet::from([graph.subject.clone()]);
    walk(model, bindings, graph, &graph.subject, 1, &mut seen, &mut rows);
    rows
}

fn walk(
    model: &Megamodel,
    bindings: &BindingTable,
    graph: &TraceGraph,
    parent: &str,
    depth: usize,
    seen: &mut BTreeSet<String>,
    rows: &mut Vec<TraceRow>,
) {
    for part in direct_parts(model, bindings, parent) {
        if !seen.insert(part.clone()) {
            continue;
        }
        let right: Vec<String> =
            graph.links.iter().filter(|l| l.left == part).flat_map(|l| uris(model, &l.right)).collect();
        rows.push(TraceRow { depth, left: fragment_label(model, parent, &part), right: right.join(", ") });
        walk(model, bindings, graph, &part, depth + 1, seen, rows);
    }
}

/// Two tab-separated columns, depth as two-space indentation.
pub fn format_trace_table(rows: &[TraceRow]) -> String {
    let mut out = String::new();
    for row in rows {
        let _ = writeln!(out, "{}{}\t{}", "  ".repeat(row.depth), row.left, row.right);
    }
    out
}
