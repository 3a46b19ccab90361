use std::collections::BTreeMap;

use super::{ResolveError, ResourceObject, Workspace};
use crate::diagnostics::Diagnostic;
use crate::model::{names, Binding, Cardinality, Megamodel};

#[derive(Debug, Clone)]
pub enum BindingState {
    Resolved(Vec<ResourceObject>),
    Failed(ResolveError),
}

#[derive(Debug, Clone)]
pub struct ResolvedBinding {
    pub uri: String,
    pub state: BindingState,
}

impl ResolvedBinding {
    pub fn objects(&self) -> &[ResourceObject] {
        match &self.state {
            BindingState::Resolved(objs) => objs,
            BindingState::Failed(_) => &[],
        }
    }
}

/// Resolution results per artifact entity, in binding order.
#[derive(Debug, Clone, Default)]
pub struct BindingTable {
    entries: BTreeMap<String, Vec<ResolvedBinding>>,
}

impl BindingTable {
    pub fn bindings(&self, entity: &str) -> &[ResolvedBinding] {
        self.entries.get(entity).map_or(&[], Vec::as_slice)
    }

    /// All objects the entity's bindings resolved to.
    pub fn objects(&self, entity: &str) -> Vec<&ResourceObject> {
        self.bindings(entity).iter().flat_map(|b| b.objects()).collect()
    }

    /// Whether some binding of the entity failed to resolve.
    pub fn is_unresolved(&self, entity: &str) -> bool {
        self.bindings(entity).iter().any(|b| matches!(b.state, BindingState::Failed(_)))
    }

    pub fn contains(&self, entity: &str, uri: &str) -> bool {
        self.bindings(entity).iter().any(|b| b.uri == uri)
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn insert(&mut self, entity: &str, binding: ResolvedBinding) {
        self.entries.entry(entity.to_string()).or_default().push(binding);
    }
}

/// Whether bindings of `entity` denote artifacts to resolve. Bindings of
/// languages, concepts and technologies are annotations or markers, and
/// bindings of plugins select implementations.
pub fn is_resolvable(model: &Megamodel, entity: &str) -> bool {
    model.is_a(entity, names::ARTIFACT) && !model.is_a(entity, names::PLUGIN)
}

/// Resolve one binding into `table`. Returns a diagnostic on failure.
pub fn resolve_binding(
    model: &Megamodel,
    ws: &Workspace,
    table: &mut BindingTable,
    binding: &Binding,
) -> Option<Diagnostic> {
    if !is_resolvable(model, &binding.subject) || table.contains(&binding.subject, &binding.uri) {
        return None;
    }
    let (state, diagnostic) = match ws.resolve(&binding.uri) {
        Ok(objects) => (BindingState::Resolved(objects), None),
        Err(err) => {
            let code = if matches!(err, ResolveError::Transient(_)) { "W202" } else { "W201" };
            let diag =
                Diagnostic::warning(code, format!("cannot resolve `{}` for `{}`: {err}", binding.uri, binding.subject))
                    .with_span(binding.span.clone());
            (BindingState::Failed(err), Some(diag))
        }
    };
    table.insert(&binding.subject, ResolvedBinding { uri: binding.uri.clone(), state });
    diagnostic
}

/// Resolve every artifact binding of the model. Failures never abort; they
/// become W201/W202 warnings, and cardinality-one artifacts that resolve to
/// zero or several objects get E201.
pub fn resolve_all_bindings(model: &Megamodel, ws: &Workspace) -> (BindingTable, Vec<Diagnostic>) {
    let mut table = BindingTable::default();
    let mut diagnostics = Vec::new();
    for binding in model.bindings() {
        diagnostics.extend(resolve_binding(model, ws, &mut table, binding));
    }
    for entity in model.entities() {
        if entity.cardinality != Cardinality::One || table.bindings(&entity.name).is_empty() {
            continue;
        }
        if table.is_unresolved(&entity.name) {
            continue;
        }
        let count = table.objects(&entity.name).len();
        if count != 1 {
            let span = model.bindings_of(&entity.name).next().and_then(|b| b.span.clone());
            diagnostics.push(
                Diagnostic::error(
                    "E201",
                    format!("`{}` is declared as one artifact but resolves to {count} objects", entity.name),
                )
                .with_span(span),
            );
        }
    }
    ws.log("resolve", format!("{} bound entities", table.entries.len()));
    (table, diagnostics)
}
