//! Desk-scale schema conformance.
//!
//! A mini-schema is an XML document whose root element has local name
//! `schema`. Each child with local name `element` or `complexType` declares
//! the element name given by its `name` attribute. An optional `children`
//! attribute lists the allowed child element names, separated by spaces;
//! without it any declared element may appear as a child. Attributes are not
//! constrained. Instance elements are compared by local name.

use std::collections::{BTreeMap, BTreeSet};

use super::{EvalContext, EvalReport, Evaluator, Message, Statement, StatementKind};
use crate::model::names;
use crate::resolver::{ResourceObject, XmlElement};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MiniSchema {
    /// Declared element name → allowed children (`None`: unrestricted).
    declarations: BTreeMap<String, Option<BTreeSet<String>>>,
}

impl MiniSchema {
    pub fn parse(root: &XmlElement) -> Option<MiniSchema> {
        if root.local_name() != "schema" {
            return None;
        }
        let mut schema = MiniSchema::default();
        for decl in &root.children {
            if !matches!(decl.local_name(), "element" | "complexType") {
                continue;
            }
            let Some(name) = decl.attribute("name") else { continue };
            let allowed = decl.attribute("children").map(|c| c.split_whitespace().map(str::to_string).collect());
            schema.declare(name, allowed);
        }
        Some(schema)
    }

    fn declare(&mut self, name: &str, allowed: Option<BTreeSet<String>>) {
        match (self.declarations.get_mut(name), allowed) {
            (None, allowed) => {
                self.declarations.insert(name.to_string(), allowed);
            }
            (Some(Some(existing)), Some(more)) => existing.extend(more),
            (Some(slot), _) => *slot = None,
        }
    }

    /// Union of declarations.
    pub fn merge(&mut self, other: MiniSchema) {
        for (name, allowed) in other.declarations {
            self.declare(&name, allowed);
        }
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.declarations.contains_key(name)
    }

    /// Conformance messages for the subtree rooted at `root`; `path` names
    /// `root` in messages.
    pub fn check(&self, root: &XmlElement, path: &str) -> Vec<Message> {
        let mut out = Vec::new();
        self.check_element(root, path, &mut out);
        out
    }

    fn check_element(&self, elem: &XmlElement, path: &str, out: &mut Vec<Message>) {
        let name = elem.local_name();
        match self.declarations.get(name) {
            None => out.push(Message::error(format!("element `{name}` is not declared")).at(path)),
            Some(Some(allowed)) => {
                for child in &elem.children {
                    if !allowed.contains(child.local_name()) {
                        out.push(
                            Message::error(format!("element `{}` is not allowed in `{name}`", child.local_name()))
                                .at(path),
                        );
                    }
                }
            }
            Some(None) => {}
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for child in &elem.children {
            let k = counts.entry(child.tag.as_str()).or_default();
            self.check_element(child, &format!("{path}/{}#{k}", child.tag), out);
            *k += 1;
        }
    }
}

fn is_blank(object: &ResourceObject) -> bool {
    object.bytes().is_some_and(|b| b.iter().all(u8::is_ascii_whitespace))
}

/// Schema contributed by one object, or `None` if it is not a mini-schema.
fn schema_of(object: &ResourceObject) -> Option<MiniSchema> {
    if let Some(elem) = object.element() {
        return MiniSchema::parse(elem);
    }
    if is_blank(object) {
        return Some(MiniSchema::default());
    }
    object.xml_root().and_then(|root| MiniSchema::parse(&root))
}

/// `x conformsTo s` where `s` resolves to mini-schemas.
pub struct MiniSchemaConformance;

impl Evaluator for MiniSchemaConformance {
    fn name(&self) -> &str {
        "miniSchemaConformance"
    }

    fn applies_to(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<bool, String> {
        if stmt.kind != StatementKind::Relationship || stmt.predicate != names::CONFORMS_TO {
            return Ok(false);
        }
        let instances = ctx.bindings.objects(&stmt.subject);
        let schemas = ctx.bindings.objects(&stmt.object);
        Ok(!instances.is_empty() && !schemas.is_empty() && schemas.iter().all(|s| schema_of(s).is_some()))
    }

    fn evaluate(&self, stmt: &Statement, ctx: &EvalContext<'_>) -> Result<EvalReport, String> {
        let mut schema = MiniSchema::default();
        for object in ctx.bindings.objects(&stmt.object) {
            schema.merge(schema_of(object).ok_or("schema operand is not a mini-schema")?);
        }
        let mut messages = Vec::new();
        for object in ctx.bindings.objects(&stmt.subject) {
            if let Some(elem) = object.element() {
                messages.extend(schema.check(elem, &object.identity));
            } else if is_blank(object) {
                continue;
            } else if let Some(root) = object.xml_root() {
                messages.extend(schema.check(&root, &format!("{}/{}#0", object.identity, root.tag)));
            } else {
                messages.push(Message::error("not well-formed XML").at(&object.identity));
            }
        }
        Ok(EvalReport::from_messages(messages))
    }
}
