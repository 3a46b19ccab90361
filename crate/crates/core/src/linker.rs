//! Module loading and linking.
//!
//! Linking has copy-and-paste semantics: an import adds all declarations of the
//! imported module (transitively) to the importer, with three refinements.
//!
//! * Renames attached to an import item substitute names throughout that one
//!   imported instance. Importing the same module twice with different renames
//!   duplicates the renamed entities; everything not renamed unifies.
//! * Bindings in the importing module replace every binding of the same subject
//!   coming from imported modules, so the binding closest to the root wins.
//! * Structurally identical declarations are kept once, which makes diamond
//!   imports (and repeated imports) idempotent.
//!
//! A rename whose new name is already declared inside the imported instance is
//! rejected as a collision (E023). Renaming onto a name declared by the
//! importer is allowed and unifies the two entities when their declarations
//! agree.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::diagnostics::Diagnostic;
use crate::model::{prelude_raw, Element, Megamodel, ModelError, Origin, PRELUDE_NAME};
use crate::syntax::{parse, ImportItem, RawModule, Rename, SourceSpan, StatementKind, SyntaxError, SyntaxErrorKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinkError {
    #[error("module `{name}` not found")]
    ModuleNotFound { name: String, span: Option<SourceSpan> },
    #[error("import cycle: {}", cycle.join(" -> "))]
    ImportCycle { cycle: Vec<String>, span: Option<SourceSpan> },
    #[error("module `{name}` has syntax errors")]
    Syntax { name: String, errors: Vec<SyntaxError> },
    #[error("cannot read module `{name}`: {message}")]
    Io { name: String, message: String },
}

impl LinkError {
    pub fn to_diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            LinkError::ModuleNotFound { span, .. } => {
                vec![Diagnostic::error("E020", self.to_string()).with_span(span.clone())]
            }
            LinkError::ImportCycle { span, .. } => {
                vec![Diagnostic::error("E021", self.to_string()).with_span(span.clone())]
            }
            LinkError::Syntax { errors, .. } => errors.iter().map(syntax_diagnostic).collect(),
            LinkError::Io { .. } => vec![Diagnostic::error("E020", self.to_string())],
        }
    }
}

pub fn syntax_diagnostic(err: &SyntaxError) -> Diagnostic {
    let code = match err.kind {
        SyntaxErrorKind::MissingModuleHeader => "E011",
        _ => "E010",
    };
    Diagnostic::error(code, err.message.clone()).with_span(Some(err.span.clone()))
}

/// Finds modules by name.
pub trait ModuleLoader {
    /// `Ok(None)` when the module does not exist.
    fn load(&self, name: &str) -> Result<Option<RawModule>, LinkError>;
}

/// Loads `<dir>/<Name>.megal` from a list of search directories, first hit
/// wins. The prelude falls back to the built-in one.
#[derive(Debug, Clone, Default)]
pub struct FsLoader {
    pub search_paths: Vec<PathBuf>,
    /// Spans show file paths relative to this directory when possible.
    pub display_root: Option<PathBuf>,
}

impl FsLoader {
    pub fn new(search_paths: Vec<PathBuf>, display_root: Option<PathBuf>) -> FsLoader {
        FsLoader { search_paths, display_root }
    }

    pub fn display_name(&self, path: &Path) -> String {
        let shown = self.display_root.as_ref().and_then(|root| path.strip_prefix(root).ok()).unwrap_or(path);
        shown.to_string_lossy().replace('\\', "/")
    }

    /// Parse a module file directly (used for the root module).
    pub fn load_file(&self, path: &Path) -> Result<RawModule, LinkError> {
        let name = self.display_name(path);
        let text =
            fs::read_to_string(path).map_err(|e| LinkError::Io { name: name.clone(), message: e.to_string() })?;
        parse(&text, &name).map_err(|errors| LinkError::Syntax { name, errors })
    }
}

impl ModuleLoader for FsLoader {
    fn load(&self, name: &str) -> Result<Option<RawModule>, LinkError> {
        for dir in &self.search_paths {
            let path = dir.join(format!("{name}.megal"));
            if path.is_file() {
                return self.load_file(&path).map(Some);
            }
        }
        if name == PRELUDE_NAME {
            return Ok(Some(prelude_raw()));
        }
        Ok(None)
    }
}

/// In-memory loader keyed by module name; used by tests and embedders.
#[derive(Debug, Clone, Default)]
pub struct MapLoader {
    sources: HashMap<String, String>,
}

impl MapLoader {
    pub fn new() -> MapLoader {
        MapLoader::default()
    }

    pub fn with(mut self, name: &str, text: &str) -> MapLoader {
        self.sources.insert(name.to_string(), text.to_string());
        self
    }
}

impl ModuleLoader for MapLoader {
    fn load(&self, name: &str) -> Result<Option<RawModule>, LinkError> {
        match self.sources.get(name) {
            Some(text) => {
                let file = format!("{name}.megal");
                parse(text, &file).map(Some).map_err(|errors| LinkError::Syntax { name: name.to_string(), errors })
            }
            None if name == PRELUDE_NAME => Ok(Some(prelude_raw())),
            None => Ok(None),
        }
    }
}

/// Root module plus the transitive closure of its imports. Acyclic.
#[derive(Debug, Clone)]
pub struct ModuleGraph {
    pub root: String,
    nodes: IndexMap<String, RawModule>,
}

impl ModuleGraph {
    pub fn module(&self, name: &str) -> Option<&RawModule> {
        self.nodes.get(name)
    }

    pub fn module_names(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    pub fn modules(&self) -> impl Iterator<Item = &RawModule> {
        self.nodes.values()
    }

    /// Import edges `(importer, imported item)`.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &ImportItem)> {
        self.nodes.values().flat_map(|m| m.imports.iter().map(move |i| (m.name.as_str(), i)))
    }
}

/// Load the import closure of `root`. The prelude is always part of the graph.
pub fn load_graph(root: RawModule, loader: &dyn ModuleLoader) -> Result<ModuleGraph, LinkError> {
    let mut graph = ModuleGraph { root: root.name.clone(), nodes: IndexMap::new() };
    let mut stack = Vec::new();
    visit(root, loader, &mut graph, &mut stack)?;
    if !graph.nodes.contains_key(PRELUDE_NAME) {
        let prelude = loader
            .load(PRELUDE_NAME)?
            .ok_or(LinkError::ModuleNotFound { name: PRELUDE_NAME.to_string(), span: None })?;
        visit(prelude, loader, &mut graph, &mut stack)?;
    }
    Ok(graph)
}

fn visit(
    module: RawModule,
    loader: &dyn ModuleLoader,
    graph: &mut ModuleGraph,
    stack: &mut Vec<String>,
) -> Result<(), LinkError> {
    stack.push(module.name.clone());
    for item in &module.imports {
        if let Some(pos) = stack.iter().position(|n| n == &item.module) {
            let mut cycle: Vec<String> = stack[pos..].to_vec();
            cycle.push(item.module.clone());
            return Err(LinkError::ImportCycle { cycle, span: Some(item.span.clone()) });
        }
        if graph.nodes.contains_key(&item.module) {
            continue;
        }
        let imported = loader
            .load(&item.module)?
            .ok_or_else(|| LinkError::ModuleNotFound { name: item.module.clone(), span: Some(item.span.clone()) })?;
        visit(imported, loader, graph, stack)?;
    }
    stack.pop();
    graph.nodes.insert(module.name.clone(), module);
    Ok(())
}

/// One statement of a flattened module instance, with the module that
/// contributed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceItem {
    pub kind: StatementKind,
    pub span: SourceSpan,
    pub module: String,
}

/// The names a list of items declares.
fn declared_names(items: &[InstanceItem]) -> HashSet<&str> {
    items
        .iter()
        .filter_map(|item| match &item.kind {
            StatementKind::EntityDecl { name, .. }
            | StatementKind::EntityTypeDecl { name, .. }
            | StatementKind::RelTypeDecl { name, .. }
            | StatementKind::FuncDecl { name, .. } => Some(name.as_str()),
            _ => None,
        })
        .collect()
}

fn substitute(kind: &StatementKind, map: &HashMap<&str, &str>) -> StatementKind {
    let s = |name: &String| map.get(name.as_str()).map_or_else(|| name.clone(), |n| n.to_string());
    match kind {
        StatementKind::EntityDecl { name, ty, many } => {
            StatementKind::EntityDecl { name: s(name), ty: s(ty), many: *many }
        }
        StatementKind::EntityTypeDecl { name, supertype } => {
            StatementKind::EntityTypeDecl { name: s(name), supertype: s(supertype) }
        }
        StatementKind::RelTypeDecl { name, left, right } => {
            StatementKind::RelTypeDecl { name: s(name), left: s(left), right: s(right) }
        }
        StatementKind::FuncDecl { name, domain, range } => {
            StatementKind::FuncDecl { name: s(name), domain: s(domain), range: s(range) }
        }
        StatementKind::FuncApp { function, input, output } => {
            StatementKind::FuncApp { function: s(function), input: s(input), output: s(output) }
        }
        StatementKind::RelStmt { subject, predicate, object } => {
            StatementKind::RelStmt { subject: s(subject), predicate: s(predicate), object: s(object) }
        }
        StatementKind::Binding { subject, uri } => StatementKind::Binding { subject: s(subject), uri: uri.clone() },
    }
}

/// Substitute names in an imported instance. Every old name must be declared
/// in the instance; no new name may already be declared there.
pub fn apply_renames(
    items: &[InstanceItem],
    renames: &[Rename],
    module: &str,
    span: Option<&SourceSpan>,
) -> Result<Vec<InstanceItem>, Box<Diagnostic>> {
    if renames.is_empty() {
        return Ok(items.to_vec());
    }
    let declared = declared_names(items);
    let mut map: HashMap<&str, &str> = HashMap::new();
    let mut targets = HashSet::new();
    for rename in renames {
        if !declared.contains(rename.old.as_str()) {
            return Err(Box::new(
                Diagnostic::error(
                    "E022",
                    format!("rename target `{}` is not declared in module `{module}`", rename.old),
                )
                .with_span(span.cloned()),
            ));
        }
        let clashes = rename.new != rename.old && declared.contains(rename.new.as_str());
        if clashes || !targets.insert(rename.new.as_str()) || map.contains_key(rename.old.as_str()) {
            return Err(Box::new(
                Diagnostic::error(
                    "E023",
                    format!(
                        "rename `{} -> {}` collides with an existing name in module `{module}`",
                        rename.old, rename.new
                    ),
                )
                .with_span(span.cloned()),
            ));
        }
        map.insert(&rename.old, &rename.new);
    }
    Ok(items
        .iter()
        .map(|item| InstanceItem {
            kind: substitute(&item.kind, &map),
            span: item.span.clone(),
            module: item.module.clone(),
        })
        .collect())
}

struct Instantiator<'g> {
    graph: &'g ModuleGraph,
    cache: HashMap<String, Vec<InstanceItem>>,
    diagnostics: Vec<Diagnostic>,
}

impl Instantiator<'_> {
    fn instance(&mut self, name: &str) -> Vec<InstanceItem> {
        if let Some(items) = self.cache.get(name) {
            return items.clone();
        }
        let graph = self.graph;
        let module = graph.module(name).expect("graph is closed under imports");
        let mut items = Vec::new();
        for import in &module.imports {
            let imported = self.instance(&import.module);
            match apply_renames(&imported, &import.renames, &import.module, Some(&import.span)) {
                Ok(renamed) => items.extend(renamed),
                Err(diag) => {
                    // Recover by importing the instance unrenamed.
                    self.diagnostics.push(*diag);
                    items.extend(imported);
                }
            }
        }
        let rebound: HashSet<&str> = module
            .statements
            .iter()
            .filter_map(|s| match &s.kind {
                StatementKind::Binding { subject, .. } => Some(subject.as_str()),
                _ => None,
            })
            .collect();
        items.retain(
            |item| !matches!(&item.kind, StatementKind::Binding { subject, .. } if rebound.contains(subject.as_str())),
        );
        items.extend(module.statements.iter().map(|s| InstanceItem {
            kind: s.kind.clone(),
            span: s.span.clone(),
            module: module.name.clone(),
        }));
        self.cache.insert(name.to_string(), items.clone());
        items
    }
}

/// Flatten the root module of `graph` into an ordered instance, prelude first.
pub fn flatten(graph: &ModuleGraph) -> (Vec<InstanceItem>, Vec<Diagnostic>) {
    let mut inst = Instantiator { graph, cache: HashMap::new(), diagnostics: Vec::new() };
    let mut items = Vec::new();
    if graph.root != PRELUDE_NAME && graph.module(PRELUDE_NAME).is_some() {
        items.extend(inst.instance(PRELUDE_NAME));
    }
    items.extend(inst.instance(&graph.root));
    (items, inst.diagnostics)
}

pub fn model_error_diagnostic(err: &ModelError, span: Option<&SourceSpan>) -> Diagnostic {
    let code = match err {
        ModelError::UnknownName { .. } | ModelError::UnknownType { .. } => "E001",
        ModelError::ConflictingDeclaration { .. } | ModelError::TypeCycle { .. } => "E002",
        ModelError::UnknownRelationshipType { .. } => "E004",
        ModelError::NotAFunction { .. } => "E005",
        ModelError::EmptyBinding { .. } => "E007",
    };
    let related = match err {
        ModelError::ConflictingDeclaration { previous, .. } => previous.clone(),
        _ => None,
    };
    Diagnostic::error(code, err.to_string()).with_span(span.cloned()).with_related(related)
}

#[derive(Debug, Clone)]
pub struct LinkOutput {
    pub model: Megamodel,
    pub diagnostics: Vec<Diagnostic>,
}

/// Merge the module graph into one reflected megamodel.
pub fn link(graph: &ModuleGraph) -> LinkOutput {
    let (items, mut diagnostics) = flatten(graph);
    let mut model = Megamodel::new(&graph.root);
    let elements: Vec<Element> = items
        .iter()
        .map(|item| {
            let origin = if item.module == graph.root {
                Origin::Declared
            } else {
                Origin::Imported { module: item.module.clone() }
            };
            Element::from_statement(&item.kind, &item.span, origin)
        })
        .collect();

    // Declarations before uses: types, then entities, then functions; reflect;
    // then statements and bindings in source order.
    let phases: [&dyn Fn(&Element) -> bool; 3] = [
        &|e| matches!(e, Element::EntityType(_) | Element::RelationshipType { .. }),
        &|e| matches!(e, Element::Entity(_)),
        &|e| matches!(e, Element::Function(_)),
    ];
    for phase in phases {
        for element in elements.iter().filter(|e| phase(e)) {
            if let Err(err) = model.add(element.clone()) {
                diagnostics.push(model_error_diagnostic(&err, element.span()));
            }
        }
    }
    model.reflect();
    for element in elements.iter().filter(|e| !e.is_declaration()) {
        if let Err(err) = model.add(element.clone()) {
            diagnostics.push(model_error_diagnostic(&err, element.span()));
        }
    }
    LinkOutput { model, diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;

    const XML: &str = "module XML import (Prelude)
XML : Language
XSD : Language
XSD subsetOf XML
xmlFile : Artifact
xsdFiles : Artifact+
xmlFile elementOf XML
xsdFiles elementOf XSD
xmlFile conformsTo xsdFiles
xmlFile = \"fixtures/a.xml\"
xsdFiles = \"fixtures/schema.xsd\"
";

    fn graph(loader: &MapLoader, root: &str) -> Result<ModuleGraph, LinkError> {
        let raw = loader.load(root)?.unwrap();
        load_graph(raw, loader)
    }

    fn emf_api_loader() -> MapLoader {
        MapLoader::new()
            .with("XML", XML)
            .with(
                "EMF",
                "module EMF import (Prelude)\nEcore : Language\nmetaModel : Artifact\nmetaModel elementOf Ecore",
            )
            .with("EMFModelAPI", "module EMFModelAPI import (EMF, XML)\nXMI : Language\nXMI subsetOf XML")
    }

    #[test]
    fn graph_closure() {
        let g = graph(&emf_api_loader(), "EMFModelAPI").unwrap();
        let mut names: Vec<_> = g.module_names().collect();
        names.sort();
        assert_eq!(names, ["EMF", "EMFModelAPI", "Prelude", "XML"]);
    }

    #[test]
    fn prelude_alone() {
        let loader = MapLoader::new();
        let g = load_graph(prelude_raw(), &loader).unwrap();
        assert_eq!(g.module_names().collect::<Vec<_>>(), ["Prelude"]);
    }

    #[test]
    fn import_cycle() {
        let loader = MapLoader::new().with("A", "module A import (B)").with("B", "module B import (A)");
        match graph(&loader, "A").unwrap_err() {
            LinkError::ImportCycle { cycle, span } => {
                assert_eq!(cycle, ["A", "B", "A"]);
                assert_eq!(span.unwrap().file, "B.megal");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_module() {
        let loader = MapLoader::new().with("A", "module A import (Nope)");
        assert!(matches!(graph(&loader, "A").unwrap_err(), LinkError::ModuleNotFound { .. }));
    }

    #[test]
    fn diamond_keeps_prelude_once() {
        let g = graph(&emf_api_loader(), "EMFModelAPI").unwrap();
        let out = link(&g);
        assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
        let sigs = &out.model.types.relationship_type("defines").unwrap().signatures;
        assert_eq!(sigs.len(), 2);
        assert_eq!(out.model.entity("XMI").unwrap().origin, Origin::Declared);
        assert_eq!(out.model.entity("XML").unwrap().origin, Origin::Imported { module: "XML".into() });
    }

    fn items_of(text: &str) -> Vec<InstanceItem> {
        let raw = parse(text, "X.megal").unwrap();
        raw.statements
            .iter()
            .map(|s| InstanceItem { kind: s.kind.clone(), span: s.span.clone(), module: raw.name.clone() })
            .collect()
    }

    #[test]
    fn rename_substitutes_everywhere() {
        let items = items_of(XML);
        let renamed =
            apply_renames(&items, &[Rename { old: "xmlFile".into(), new: "inputDoc".into() }], "XML", None).unwrap();
        let printed: Vec<String> = renamed.iter().map(|i| crate::syntax::print_statement(&i.kind)).collect();
        assert!(printed.iter().all(|l| !l.contains("xmlFile")));
        assert!(printed.contains(&"inputDoc = \"fixtures/a.xml\"".to_string()));
        assert!(printed.contains(&"inputDoc conformsTo xsdFiles".to_string()));
    }

    #[test]
    fn empty_rename_is_identity() {
        let items = items_of(XML);
        assert_eq!(apply_renames(&items, &[], "XML", None).unwrap(), items);
    }

    #[test]
    fn rename_unknown_target() {
        let items = items_of(XML);
        let err = apply_renames(&items, &[Rename { old: "nope".into(), new: "x".into() }], "XML", None).unwrap_err();
        assert_eq!(err.code, "E022");
    }

    #[test]
    fn rename_collision() {
        let items = items_of(XML);
        let err = apply_renames(&items, &[Rename { old: "xmlFile".into(), new: "xsdFiles".into() }], "XML", None)
            .unwrap_err();
        assert_eq!(err.code, "E023");
    }

    #[test]
    fn failed_rename_still_imports_the_module() {
        let loader = MapLoader::new().with("XML", XML).with(
            "Root",
            "module Root import (XML [nope -> x])
xmlFile conformsTo xsdFiles",
        );
        let out = link(&graph(&loader, "Root").unwrap());
        let codes: Vec<&str> = out.diagnostics.iter().map(|d| d.code).collect();
        assert_eq!(codes, ["E022"]);
        assert!(out.model.entity("xmlFile").is_some());
    }

    #[test]
    fn duplication_by_renaming() {
        let loader = MapLoader::new()
            .with("XML", XML)
            .with("Transform", "module Transform import (XML [xmlFile -> inputDoc], XML [xmlFile -> outputDoc])");
        let out = link(&graph(&loader, "Transform").unwrap());
        assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
        let artifacts: Vec<_> = out.model.entities().filter(|e| e.ty == "Artifact").map(|e| e.name.as_str()).collect();
        assert_eq!(artifacts, ["inputDoc", "xsdFiles", "outputDoc"]);
        assert_eq!(out.model.bindings_of("xsdFiles").count(), 1);
    }

    #[test]
    fn importer_binding_overrides() {
        let loader =
            MapLoader::new().with("XML", XML).with("App", "module App import (XML)\nxmlFile = \"fixtures/b.xml\"");
        let out = link(&graph(&loader, "App").unwrap());
        let uris: Vec<_> = out.model.bindings_of("xmlFile").map(|b| b.uri.as_str()).collect();
        assert_eq!(uris, ["fixtures/b.xml"]);
    }

    #[test]
    fn conflicting_redeclaration() {
        let loader = MapLoader::new().with("XML", XML).with("App", "module App import (XML)\nXML : Artifact");
        let out = link(&graph(&loader, "App").unwrap());
        assert_eq!(out.diagnostics.len(), 1);
        let d = &out.diagnostics[0];
        assert_eq!(d.code, "E002");
        assert_eq!(d.span.as_ref().unwrap().line, 2);
        assert_eq!(d.related.as_ref().unwrap().file, "XML.megal");
    }

    #[test]
    fn forward_references_within_module() {
        let loader = MapLoader::new().with("M", "module M\nx elementOf L\nx : Artifact\nL : Language");
        let out = link(&graph(&loader, "M").unwrap());
        assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
    }
}
