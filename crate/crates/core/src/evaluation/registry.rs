use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::builtins::builtin_evaluator;
use super::external::ExternalEvaluator;
use super::Evaluator;
use crate::config::PluginSpec;
use crate::diagnostics::Diagnostic;
use crate::model::{names, Megamodel};

/// A plugin entity with its selected implementation and nested plugins.
#[derive(Clone)]
pub struct PluginNode {
    pub name: String,
    /// Binding URI that selected the implementation.
    pub implementation: Option<String>,
    /// `None` for unbound grouping plugins and unknown implementations.
    pub evaluator: Option<Arc<dyn Evaluator>>,
    pub children: Vec<PluginNode>,
}

impl std::fmt::Debug for PluginNode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PluginNode")
            .field("name", &self.name)
            .field("implementation", &self.implementation)
            .field("evaluator", &self.evaluator.as_ref().map(|e| e.name().to_string()))
            .field("children", &self.children)
            .finish()
    }
}

impl PluginNode {
    fn flatten<'a>(&'a self, out: &mut Vec<&'a PluginNode>) {
        out.push(self);
        for child in &self.children {
            child.flatten(out);
        }
    }
}

/// Root plugins per relationship type (or function) name.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    roots: BTreeMap<String, Vec<PluginNode>>,
}

impl Registry {
    pub fn roots(&self, name: &str) -> &[PluginNode] {
        self.roots.get(name).map_or(&[], Vec::as_slice)
    }

    /// Every plugin registered for `name`, roots first, depth-first.
    pub fn evaluators_for(&self, name: &str) -> Vec<&PluginNode> {
        let mut out = Vec::new();
        for root in self.roots(name) {
            root.flatten(&mut out);
        }
        out
    }

    pub fn registered(&self) -> impl Iterator<Item = &str> {
        self.roots.keys().map(String::as_str)
    }

    /// Register a root plugin programmatically.
    pub fn register(&mut self, name: &str, node: PluginNode) {
        self.roots.entry(name.to_string()).or_default().push(node);
    }
}

enum Selection {
    Found(Arc<dyn Evaluator>),
    Unknown(String),
}

fn select(uri: &str, plugins: &BTreeMap<String, PluginSpec>) -> Selection {
    let (scheme, rest) = uri.split_once(':').unwrap_or(("", uri));
    let rest = rest.trim_start_matches('/');
    match scheme {
        "builtin" | "classpath" => match builtin_evaluator(rest) {
            Some(e) => Selection::Found(e),
            None => Selection::Unknown(format!("no built-in analysis named `{rest}`")),
        },
        "exec" => match plugins.get(rest) {
            Some(spec) => Selection::Found(Arc::new(ExternalEvaluator::new(rest, spec.clone()))),
            None => Selection::Unknown(format!("no plugin command `{rest}` in the config")),
        },
        _ => Selection::Unknown(format!("unsupported implementation URI `{uri}`")),
    }
}

struct Builder<'a> {
    model: &'a Megamodel,
    plugins: &'a BTreeMap<String, PluginSpec>,
    diagnostics: Vec<Diagnostic>,
    reported: BTreeSet<String>,
}

impl Builder<'_> {
    fn node(&mut self, name: &str, visiting: &mut Vec<String>) -> PluginNode {
        visiting.push(name.to_string());
        let child_names: Vec<String> = self
            .model
            .relationships_with(names::PART_OF)
            .filter(|r| r.object == name && self.model.is_a(&r.subject, names::PLUGIN))
            .map(|r| r.subject.clone())
            .filter(|child| !visiting.contains(child))
            .collect();
        let mut children = Vec::new();
        for child in child_names {
            children.push(self.node(&child, visiting));
        }
        visiting.pop();

        let binding = self.model.bindings_of(name).next();
        let span =
            binding.and_then(|b| b.span.clone()).or_else(|| self.model.entity(name).and_then(|e| e.span.clone()));
        let (implementation, evaluator, problem) = match binding {
            Some(b) => match select(&b.uri, self.plugins) {
                Selection::Found(e) => (Some(b.uri.clone()), Some(e), None),
                Selection::Unknown(why) => (Some(b.uri.clone()), None, Some(why)),
            },
            None if children.is_empty() => (None, None, Some("plugin has no binding".to_string())),
            None => (None, None, None),
        };
        if let Some(why) = problem {
            if self.reported.insert(name.to_string()) {
                self.diagnostics.push(
                    Diagnostic::warning("W301", format!("plugin `{name}` is never applicable: {why}")).with_span(span),
                );
            }
        }
        PluginNode { name: name.to_string(), implementation, evaluator, children }
    }
}

/// Build the evaluator registry from `T evaluatedBy P` and `Q partOf P`
/// statements. `T` must be a reflected relationship or entity type, or a
/// function; `P` and `Q` must be plugins.
pub fn build_registry(model: &Megamodel, plugins: &BTreeMap<String, PluginSpec>) -> (Registry, Vec<Diagnostic>) {
    let mut builder = Builder { model, plugins, diagnostics: Vec::new(), reported: BTreeSet::new() };
    let mut registry = Registry::default();
    let wiring: Vec<(String, String)> = model
        .relationships_with(names::EVALUATED_BY)
        .filter(|r| model.is_a(&r.object, names::PLUGIN))
        .filter(|r| {
            [names::RELATIONSHIP_TYPE, names::ENTITY_TYPE, names::FUNCTION].iter().any(|ty| model.is_a(&r.subject, ty))
        })
        .map(|r| (r.subject.clone(), r.object.clone()))
        .collect();
    for (target, plugin) in wiring {
        let node = builder.node(&plugin, &mut Vec::new());
        registry.register(&target, node);
    }
    (registry, builder.diagnostics)
}
