use std::collections::BTreeSet;
use std::sync::Arc;

use regex::Regex;

use super::mini_schema::MiniSchemaConformance;
use super::names::{match_parts, parts_of};
use super::{EvalContext, EvalReport, Evaluator, Message, Statement, StatementKind};
use crate::model::{names, Megamodel};
use crate::resolver::parse_xml;

/// Names accepted after `builtin:` (or `classpath:`).
pub const BUILTIN_EVALUATORS: [&str; 7] = [
    "xmlWellformed",
    "miniSchemaConformance",
    "regexLanguage",
    "nameCorrespondence",
    "group",
    "XMLConformsToXSD",
    "ConformsToEvaluator",
];

pub const XML_MARKER: &str = "builtin-lang:xml";
pub const REGEX_MARKER: &str = "builtin-lang:regex:";

pub fn builtin_evaluator(name: &str) -> Option<Arc<dyn Evaluator>> {
    Some(match name {
        "xmlWellformed" => Arc::new(XmlWellformed),
        "miniSchemaConformance" | "XMLConformsToXSD" => Arc::new(MiniSchemaConformance),
        "regexLanguage" => Arc::new(RegexLanguage),
        "nameCorrespondence" => Arc::new(NameCorrespondence),
        "group" | "ConformsToEvaluator" => Arc::new(Group),
        _ => return None,
    })
}

/// `lang` and every language reachable from it by `subsetOf`.
fn supersets(model: &Megamodel, lang: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([lang.to_string()]);
    let mut stack = vec![lang.to_string()];
    while let Some(cur) = stack.pop() {
        for r in model.relationships_with(names::SUBSET_OF).filter(|r| r.subject == cur) {
            if seen.insert(r.object.clone()) {
                stack.push(r.object.clone());
            }
        }
    }
    seen
}

fn is_element_of(stmt: &Statement) -> bool {
    stmt.kind == StatementKind::Relationship && stmt.predicate == names::ELEMENT_OF
}

/// Whether the subject resolved to at least one object and all of them carry
/// bytes.
fn has_content(stmt: &Statement, ctx: &EvalContext<'_>) -> bool {
    let objects = ctx.bindings.objects(&stmt.subject);
    !objects.is_empty() && objects.iter().all(|o| o.bytes().is_some())
}

/// Well-formedness for `x elementOf L` where `L`, or a language `L` is a
/// subset of, carries the `builtin-lang:xml` marker binding.
pub struct XmlWellformed;

impl Evaluator for XmlWellformed {
    fn name(&self) -> &str {
        "xmlWellformed"
    }

    fn applies_to(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<bool, String> {
        if !is_element_of(stmt) {
            return Ok(false);
        }
        let marked =
            supersets(ctx.model, &stmt.object).iter().any(|l| ctx.model.bindings_of(l).any(|b| b.uri == XML_MARKER));
        Ok(marked && has_content(stmt, ctx))
    }

    fn evaluate(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<EvalReport, String> {
        let mut messages = Vec::new();
        for object in ctx.bindings.objects(&stmt.subject) {
            let bytes = object.bytes().ok_or("content vanished")?;
            if let Err(e) = parse_xml(&bytes) {
                messages.push(Message::error(format!("not well-formed XML: {e}")).at(&object.identity));
            }
        }
        Ok(EvalReport::from_messages(messages))
    }
}

/// Membership in a regular language for `x elementOf L` where `L` is bound to
/// `builtin-lang:regex:<pattern>`. The whole content must match; one
/// trailing line break is ignored.
pub struct RegexLanguage;

impl RegexLanguage {
    fn pattern(stmt: &Statement, ctx: &EvalContext<'_>) -> Option<String> {
        ctx.model.bindings_of(&stmt.object).find_map(|b| b.uri.strip_prefix(REGEX_MARKER).map(str::to_string))
    }
}

impl Evaluator for RegexLanguage {
    fn name(&self) -> &str {
        "regexLanguage"
    }

    fn applies_to(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<bool, String> {
        Ok(is_element_of(stmt) && Self::pattern(stmt, ctx).is_some() && has_content(stmt, ctx))
    }

    fn evaluate(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<EvalReport, String> {
        let pattern = Self::pattern(stmt, ctx).ok_or("no pattern")?;
        let re = Regex::new(&format!("^(?:{pattern})$")).map_err(|e| format!("invalid pattern: {e}"))?;
        let mut messages = Vec::new();
        for object in ctx.bindings.objects(&stmt.subject) {
            let bytes = object.bytes().ok_or("content vanished")?;
            let Ok(text) = std::str::from_utf8(&bytes) else {
                messages.push(Message::error("content is not UTF-8").at(&object.identity));
                continue;
            };
            let text = text.strip_suffix('\n').map(|t| t.strip_suffix('\r').unwrap_or(t)).unwrap_or(text);
            if !re.is_match(text) {
                messages.push(Message::error(format!("content does not match /{pattern}/")).at(&object.identity));
            }
        }
        Ok(EvalReport::from_messages(messages))
    }
}

/// `a correspondsTo b` where both sides have parts: satisfied iff every part
/// of `a` matches a part of `b` by normalized name. Unmatched parts of `b`
/// are reported as information. Emits the matched pairs as links.
pub struct NameCorrespondence;

impl Evaluator for NameCorrespondence {
    fn name(&self) -> &str {
        "nameCorrespondence"
    }

    fn applies_to(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<bool, String> {
        Ok(stmt.kind == StatementKind::Relationship
            && stmt.predicate == names::CORRESPONDS_TO
            && !parts_of(ctx.model, ctx.bindings, &stmt.subject).is_empty()
            && !parts_of(ctx.model, ctx.bindings, &stmt.object).is_empty())
    }

    fn evaluate(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<EvalReport, String> {
        let result = match_parts(ctx.model, ctx.bindings, &stmt.subject, &stmt.object);
        let mut messages: Vec<Message> = result
            .unmatched_left
            .iter()
            .map(|p| Message::error(format!("no counterpart in `{}`", stmt.object)).at(p))
            .collect();
        messages.extend(
            result.unmatched_right.iter().map(|p| Message::info(format!("no counterpart in `{}`", stmt.subject)).at(p)),
        );
        let mut report = EvalReport::from_messages(messages);
        report.links = result.links;
        Ok(report)
    }
}

/// Container plugin without an analysis of its own.
pub struct Group;

impl Evaluator for Group {
    fn name(&self) -> &str {
        "group"
    }

    fn applies_to(&self, _stmt: &Statement, _ctx: &EvalContext<'_>) -> Result<bool, String> {
        Ok(false)
    }

    fn evaluate(&self, _stmt: &Statement, _ctx: &EvalContext<'_>) -> Result<EvalReport, String> {
        Err("a group has no analysis".to_string())
    }
}
