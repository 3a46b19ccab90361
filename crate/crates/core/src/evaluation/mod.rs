//! Verification of relationship statements and function applications against
//! resolved artifacts.
//!
//! Analyses are wired up by the model itself: `conformsTo evaluatedBy P`
//! makes plugin `P` the root evaluator for `conformsTo`, `Q partOf P` nests
//! `Q` under `P`, and the binding of each plugin selects its implementation
//! (`builtin:<name>`, `classpath:<name>` or `exec:<config key>`).
//!
//! Each statement gets one of four statuses. `Unresolved` when an operand's
//! binding failed to resolve; `NotEvaluated` when no evaluator applies (or an
//! applicable evaluator faulted); otherwise `Violated` if any applicable
//! evaluator says so, else `Satisfied`. Missing analyses are warned about
//! for declared and imported statements that involve an artifact.

mod builtins;
mod external;
mod mini_schema;
mod names;
mod registry;

use std::fmt;

use serde::Serialize;

use crate::diagnostics::{Diagnostic, Severity};
use crate::model::{Megamodel, Origin};
use crate::resolver::{is_resolvable, BindingTable, Workspace};
use crate::syntax::SourceSpan;

pub use builtins::{builtin_evaluator, Group, NameCorrespondence, RegexLanguage, XmlWellformed, BUILTIN_EVALUATORS};
pub use external::{ExternalEvaluator, ProtocolError};
pub use mini_schema::{MiniSchema, MiniSchemaConformance};
pub use names::{direct_parts, match_parts, normalize_name, part_name, parts_of, NameMatch};
pub use registry::{build_registry, PluginNode, Registry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Satisfied,
    Violated,
    NotEvaluated,
    Unresolved,
}

impl Status {
    pub const ALL: [Status; 4] = [Status::Satisfied, Status::Violated, Status::NotEvaluated, Status::Unresolved];
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Satisfied => "Satisfied",
            Status::Violated => "Violated",
            Status::NotEvaluated => "NotEvaluated",
            Status::Unresolved => "Unresolved",
        })
    }
}

/// Outcome of a single evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    Satisfied,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub severity: Severity,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fragment: Option<String>,
}

impl Message {
    pub fn error(text: impl Into<String>) -> Message {
        Message { severity: Severity::Error, text: text.into(), fragment: None }
    }

    pub fn info(text: impl Into<String>) -> Message {
        Message { severity: Severity::Info, text: text.into(), fragment: None }
    }

    pub fn at(mut self, fragment: &str) -> Message {
        self.fragment = Some(fragment.to_string());
        self
    }
}

/// A correspondence between two fragment entities, by entity name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Link {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub verdict: Verdict,
    pub messages: Vec<Message>,
    pub links: Vec<Link>,
}

impl EvalReport {
    pub fn satisfied() -> EvalReport {
        EvalReport { verdict: Verdict::Satisfied, messages: Vec::new(), links: Vec::new() }
    }

    /// A violation always carries at least one message.
    pub fn violated(messages: Vec<Message>) -> EvalReport {
        let messages = if messages.is_empty() { vec![Message::error("violated")] } else { messages };
        EvalReport { verdict: Verdict::Violated, messages, links: Vec::new() }
    }

    pub fn from_messages(messages: Vec<Message>) -> EvalReport {
        if messages.iter().any(|m| m.severity == Severity::Error) {
            EvalReport::violated(messages)
        } else {
            EvalReport { verdict: Verdict::Satisfied, messages, links: Vec::new() }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum StatementKind {
    Relationship,
    Application,
}

/// A statement under verification. For a function application `f(x) |-> y`
/// the subject is `x`, the predicate `f` and the object `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub kind: StatementKind,
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StatementKind::Relationship => write!(f, "{} {} {}", self.subject, self.predicate, self.object),
            StatementKind::Application => write!(f, "{}({}) |-> {}", self.predicate, self.subject, self.object),
        }
    }
}

/// Every relationship statement followed by every function application, in
/// model order.
pub fn statements(model: &Megamodel) -> Vec<Statement> {
    let rels = model.relationships().iter().map(|r| Statement {
        kind: StatementKind::Relationship,
        subject: r.subject.clone(),
        predicate: r.predicate.clone(),
        object: r.object.clone(),
        origin: r.origin.clone(),
        span: r.span.clone(),
    });
    let apps = model.applications().iter().map(|a| Statement {
        kind: StatementKind::Application,
        subject: a.input.clone(),
        predicate: a.function.clone(),
        object: a.output.clone(),
        origin: a.origin.clone(),
        span: a.span.clone(),
    });
    rels.chain(apps).collect()
}

/// What evaluators may look at. Evaluators never mutate the model.
pub struct EvalContext<'a> {
    pub model: &'a Megamodel,
    pub bindings: &'a BindingTable,
    pub workspace: &'a Workspace,
}

pub trait Evaluator: Send + Sync {
    fn name(&self) -> &str;

    /// `Err` is a fault: the evaluator is skipped and the statement cannot be
    /// judged Satisfied by it.
    fn applies_to(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<bool, String>;

    /// Only called when `applies_to` returned `Ok(true)`.
    fn evaluate(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<EvalReport, String>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementResult {
    pub statement: Statement,
    pub status: Status,
    /// Plugins that applied, in evaluation order.
    pub evaluators: Vec<String>,
    pub messages: Vec<Message>,
    pub links: Vec<Link>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub results: Vec<StatementResult>,
}

impl VerificationReport {
    pub fn count(&self, status: Status) -> usize {
        self.results.iter().filter(|r| r.status == status).count()
    }

    pub fn find(&self, subject: &str, predicate: &str, object: &str) -> Option<&StatementResult> {
        self.results.iter().find(|r| {
            r.statement.subject == subject && r.statement.predicate == predicate && r.statement.object == object
        })
    }
}

/// Verify every statement of `model`.
pub fn verify(
    model: &Megamodel,
    bindings: &BindingTable,
    workspace: &Workspace,
    registry: &Registry,
) -> (VerificationReport, Vec<Diagnostic>) {
    workspace.log("evaluate", "start");
    let ctx = EvalContext { model, bindings, workspace };
    let mut report = VerificationReport::default();
    let mut diagnostics = Vec::new();
    for stmt in statements(model) {
        let result = verify_statement(&stmt, &ctx, registry, &mut diagnostics);
        report.results.push(result);
    }
    workspace.log(
        "evaluate",
        format!(
            "done satisfied={} violated={} notEvaluated={} unresolved={}",
            report.count(Status::Satisfied),
            report.count(Status::Violated),
            report.count(Status::NotEvaluated),
            report.count(Status::Unresolved)
        ),
    );
    (report, diagnostics)
}

fn warns_when_unevaluated(stmt: &Statement, ctx: &EvalContext<'_>) -> bool {
    !matches!(stmt.origin, Origin::Inferred { .. })
        && (is_resolvable(ctx.model, &stmt.subject) || is_resolvable(ctx.model, &stmt.object))
}

fn verify_statement(
    stmt: &Statement,
    ctx: &EvalContext<'_>,
    registry: &Registry,
    diagnostics: &mut Vec<Diagnostic>,
) -> StatementResult {
    let mut result = StatementResult {
        statement: stmt.clone(),
        status: Status::NotEvaluated,
        evaluators: Vec::new(),
        messages: Vec::new(),
        links: Vec::new(),
    };
    if ctx.bindings.is_unresolved(&stmt.subject) || ctx.bindings.is_unresolved(&stmt.object) {
        result.status = Status::Unresolved;
        return result;
    }
    let mut faulted = false;
    let mut verdicts = Vec::new();
    for node in registry.evaluators_for(&stmt.predicate) {
        let Some(evaluator) = &node.evaluator else { continue };
        let fault = |message: String| {
            Diagnostic::warning("W303", format!("plugin `{}` failed on `{stmt}`: {message}", node.name))
                .with_span(stmt.span.clone())
        };
        match evaluator.applies_to(stmt, ctx) {
            Ok(true) => {}
            Ok(false) => continue,
            Err(message) => {
                faulted = true;
                diagnostics.push(fault(message));
                continue;
            }
        }
        result.evaluators.push(node.name.clone());
        match evaluator.evaluate(stmt, ctx) {
            Ok(report) => {
                verdicts.push(report.verdict);
                result.messages.extend(report.messages);
                result.links.extend(report.links);
            }
            Err(message) => {
                faulted = true;
                diagnostics.push(fault(message));
            }
        }
    }
    result.status = if verdicts.contains(&Verdict::Violated) {
        Status::Violated
    } else if faulted || verdicts.is_empty() {
        Status::NotEvaluated
    } else {
        Status::Satisfied
    };
    match result.status {
        Status::Violated => {
            let detail: Vec<&str> =
                result.messages.iter().filter(|m| m.severity == Severity::Error).map(|m| m.text.as_str()).collect();
            diagnostics.push(
                Diagnostic::error("E301", format!("`{stmt}` is violated: {}", detail.join("; ")))
                    .with_span(stmt.span.clone()),
            );
        }
        Status::NotEvaluated if !faulted && warns_when_unevaluated(stmt, ctx) => {
            diagnostics.push(
                Diagnostic::warning("W302", format!("`{stmt}` was not evaluated: no applicable analysis"))
                    .with_span(stmt.span.clone()),
            );
        }
        _ => {}
    }
    for message in result.messages.iter().filter(|m| m.severity == Severity::Info) {
        let text = match &message.fragment {
            Some(f) => format!("{stmt}: {} ({f})", message.text),
            None => format!("{stmt}: {}", message.text),
        };
        diagnostics.push(Diagnostic::info("I301", text).with_span(stmt.span.clone()));
    }
    result
}
