//! Canonical JSON form of a megamodel: every collection sorted by its
//! structural key, object keys sorted, provenance included.

use serde_json::{json, Value};

use super::{Megamodel, Origin};

fn span_value(span: &Option<crate::syntax::SourceSpan>) -> Value {
    match span {
        Some(s) => json!({"file": s.file, "line": s.line, "column": s.column, "length": s.length}),
        None => Value::Null,
    }
}

impl Megamodel {
    /// Deterministic JSON serialization. With `include_prelude == false`,
    /// elements declared by the prelude (and reflections of prelude types) are
    /// omitted.
    pub fn to_canonical_json(&self, include_prelude: bool) -> Value {
        let keep = |origin: &Origin, name: Option<&str>| -> bool {
            if include_prelude {
                return true;
            }
            match origin {
                Origin::Imported { module } => module != super::PRELUDE_NAME,
                Origin::Reflected => name.is_none_or(|n| !self.is_prelude_type(n)),
                _ => true,
            }
        };

        let mut entity_types: Vec<_> = self
            .types
            .entity_types()
            .filter(|t| t.supertype.is_some() && keep(&t.origin, None))
            .map(|t| json!({"name": t.name, "supertype": t.supertype, "origin": t.origin}))
            .collect();
        entity_types.sort_by_key(|v| v["name"].as_str().unwrap_or_default().to_string());

        let mut relationship_types: Vec<_> = self
            .types
            .relationship_types()
            .filter(|t| keep(&t.origin, None))
            .map(|t| {
                let sigs: Vec<_> = t.signatures.iter().map(|s| json!([s.left, s.right])).collect();
                json!({"name": t.name, "signatures": sigs, "origin": t.origin})
            })
            .collect();
        relationship_types.sort_by_key(|v| v["name"].as_str().unwrap_or_default().to_string());

        let mut entities: Vec<_> = self
            .entities()
            .filter(|e| keep(&e.origin, Some(&e.name)))
            .map(|e| {
                json!({
                    "name": e.name,
                    "type": e.ty,
                    "cardinality": e.cardinality,
                    "origin": e.origin,
                    "span": span_value(&e.span),
                })
            })
            .collect();
        entities.sort_by_key(|v| v["name"].as_str().unwrap_or_default().to_string());

        let mut functions: Vec<_> = self
            .functions()
            .filter(|f| keep(&f.origin, None))
            .map(|f| json!({"name": f.name, "domain": f.domain, "range": f.range, "origin": f.origin}))
            .collect();
        functions.sort_by_key(|v| v["name"].as_str().unwrap_or_default().to_string());

        let mut relationships: Vec<_> = self
            .relationships()
            .iter()
            .filter(|r| keep(&r.origin, None))
            .map(|r| {
                (
                    r.key(),
                    json!({
                        "subject": r.subject,
                        "predicate": r.predicate,
                        "object": r.object,
                        "origin": r.origin,
                        "span": span_value(&r.span),
                    }),
                )
            })
            .collect();
        relationships.sort_by(|a, b| a.0.cmp(&b.0));

        let mut applications: Vec<_> = self
            .applications()
            .iter()
            .filter(|a| keep(&a.origin, None))
            .map(|a| {
                (
                    a.key(),
                    json!({
                        "function": a.function,
                        "input": a.input,
                        "output": a.output,
                        "origin": a.origin,
                        "span": span_value(&a.span),
                    }),
                )
            })
            .collect();
        applications.sort_by(|a, b| a.0.cmp(&b.0));

        let mut bindings: Vec<_> = self
            .bindings()
            .iter()
            .filter(|b| keep(&b.origin, None))
            .map(|b| {
                ((b.subject.clone(), b.uri.clone()), json!({"subject": b.subject, "uri": b.uri, "origin": b.origin}))
            })
            .collect();
        bindings.sort_by(|a, b| a.0.cmp(&b.0));

        json!({
            "name": self.name,
            "entityTypes": entity_types,
            "relationshipTypes": relationship_types,
            "entities": entities,
            "functions": functions,
            "relationships": relationships.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
            "applications": applications.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
            "bindings": bindings.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
        })
    }

    /// Whether `name` is a type declared by the prelude.
    pub fn is_prelude_type(&self, name: &str) -> bool {
        let from_prelude = |origin: &Origin| match origin {
            Origin::Imported { module } => module == super::PRELUDE_NAME,
            _ => false,
        };
        name == super::ROOT_TYPE
            || self.types.entity_type(name).is_some_and(|t| from_prelude(&t.origin))
            || self.types.relationship_type(name).is_some_and(|t| from_prelude(&t.origin))
    }
}
