//! Semantic megamodel: typed entities, relationship statements, functions and
//! bindings over a single flat namespace, plus the built-in prelude.
//!
//! A [`Megamodel`] only grows. Every insertion goes through [`Megamodel::add`],
//! which validates references, rejects conflicting re-declarations and turns
//! structural duplicates into no-ops.

mod prelude;
mod serialize;
mod types;

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::syntax::{SourceSpan, StatementKind};

pub use prelude::{prelude_module, prelude_raw, PRELUDE_FILE, PRELUDE_NAME, PRELUDE_SOURCE};
pub use types::{EntityType, RelationshipType, Signature, TypeTable, ROOT_TYPE};

/// Names of prelude types the toolkit gives special meaning to.
pub mod names {
    pub const ARTIFACT: &str = "Artifact";
    pub const TRANSIENT: &str = "Transient";
    pub const PLUGIN: &str = "Plugin";
    pub const LANGUAGE: &str = "Language";
    pub const TECHNOLOGY: &str = "Technology";
    pub const CONCEPT: &str = "Concept";
    pub const FUNCTION: &str = "Function";
    pub const ENTITY_TYPE: &str = "EntityType";
    pub const RELATIONSHIP_TYPE: &str = "RelationshipType";

    pub const SUBSET_OF: &str = "subsetOf";
    pub const ELEMENT_OF: &str = "elementOf";
    pub const CONFORMS_TO: &str = "conformsTo";
    pub const CORRESPONDS_TO: &str = "correspondsTo";
    pub const PART_OF: &str = "partOf";
    pub const FACILITATES: &str = "facilitates";
    pub const EVALUATED_BY: &str = "evaluatedBy";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cardinality {
    One,
    Many,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Declared,
    Imported { module: String },
    Inferred { rule: String },
    Reflected,
}

impl Origin {
    pub fn inferred(rule: &str) -> Origin {
        Origin::Inferred { rule: rule.to_string() }
    }

    pub fn is_inferred_by(&self, rule: &str) -> bool {
        matches!(self, Origin::Inferred { rule: r } if r == rule)
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Declared => f.write_str("declared"),
            Origin::Imported { module } => write!(f, "imported({module})"),
            Origin::Inferred { rule } => write!(f, "inferred({rule})"),
            Origin::Reflected => f.write_str("reflected"),
        }
    }
}

impl Serialize for Origin {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub name: String,
    pub ty: String,
    pub cardinality: Cardinality,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDecl {
    pub name: String,
    pub domain: String,
    pub range: String,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelKey {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl fmt::Display for RelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelStmt {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

impl RelStmt {
    pub fn new(subject: &str, predicate: &str, object: &str, origin: Origin) -> RelStmt {
        RelStmt {
            subject: subject.to_string(),
            predicate: predicate.to_string(),
            object: object.to_string(),
            origin,
            span: None,
        }
    }

    pub fn key(&self) -> RelKey {
        RelKey { subject: self.subject.clone(), predicate: self.predicate.clone(), object: self.object.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AppKey {
    pub function: String,
    pub input: String,
    pub output: String,
}

impl fmt::Display for AppKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) |-> {}", self.function, self.input, self.output)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncApp {
    pub function: String,
    pub input: String,
    pub output: String,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

impl FuncApp {
    pub fn key(&self) -> AppKey {
        AppKey { function: self.function.clone(), input: self.input.clone(), output: self.output.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub subject: String,
    pub uri: String,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

/// Any insertable model element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    EntityType(EntityType),
    RelationshipType { name: String, signature: Signature, origin: Origin, span: Option<SourceSpan> },
    Entity(Entity),
    Function(FuncDecl),
    Relationship(RelStmt),
    Application(FuncApp),
    Binding(Binding),
}

impl Element {
    /// Convert a parsed statement into an element with the given provenance.
    pub fn from_statement(kind: &StatementKind, span: &SourceSpan, origin: Origin) -> Element {
        let span = Some(span.clone());
        match kind {
            StatementKind::EntityDecl { name, ty, many } => Element::Entity(Entity {
                name: name.clone(),
                ty: ty.clone(),
                cardinality: if *many { Cardinality::Many } else { Cardinality::One },
                origin,
                span,
            }),
            StatementKind::EntityTypeDecl { name, supertype } => {
                Element::EntityType(EntityType { name: name.clone(), supertype: Some(supertype.clone()), origin, span })
            }
            StatementKind::RelTypeDecl { name, left, right } => Element::RelationshipType {
                name: name.clone(),
                signature: Signature { left: left.clone(), right: right.clone() },
                origin,
                span,
            },
            StatementKind::FuncDecl { name, domain, range } => Element::Function(FuncDecl {
                name: name.clone(),
                domain: domain.clone(),
                range: range.clone(),
                origin,
                span,
            }),
            StatementKind::FuncApp { function, input, output } => Element::Application(FuncApp {
                function: function.clone(),
                input: input.clone(),
                output: output.clone(),
                origin,
                span,
            }),
            StatementKind::RelStmt { subject, predicate, object } => Element::Relationship(RelStmt {
                subject: subject.clone(),
                predicate: predicate.clone(),
                object: object.clone(),
                origin,
                span,
            }),
            StatementKind::Binding { subject, uri } => {
                Element::Binding(Binding { subject: subject.clone(), uri: uri.clone(), origin, span })
            }
        }
    }

    pub fn span(&self) -> Option<&SourceSpan> {
        match self {
            Element::EntityType(t) => t.span.as_ref(),
            Element::RelationshipType { span, .. } => span.as_ref(),
            Element::Entity(e) => e.span.as_ref(),
            Element::Function(f) => f.span.as_ref(),
            Element::Relationship(r) => r.span.as_ref(),
            Element::Application(a) => a.span.as_ref(),
            Element::Binding(b) => b.span.as_ref(),
        }
    }

    pub fn origin(&self) -> &Origin {
        match self {
            Element::EntityType(t) => &t.origin,
            Element::RelationshipType { origin, .. } => origin,
            Element::Entity(e) => &e.origin,
            Element::Function(f) => &f.origin,
            Element::Relationship(r) => &r.origin,
            Element::Application(a) => &a.origin,
            Element::Binding(b) => &b.origin,
        }
    }

    /// Whether this element introduces a declaration (as opposed to a statement
    /// about existing names).
    pub fn is_declaration(&self) -> bool {
        matches!(
            self,
            Element::EntityType(_) | Element::RelationshipType { .. } | Element::Entity(_) | Element::Function(_)
        )
    }

    /// Rank used to order insertions so that declarations precede uses.
    pub fn kind_rank(&self) -> u8 {
        match self {
            Element::EntityType(_) => 0,
            Element::RelationshipType { .. } => 1,
            Element::Entity(_) => 2,
            Element::Function(_) => 3,
            Element::Relationship(_) => 4,
            Element::Application(_) => 5,
            Element::Binding(_) => 6,
        }
    }

    /// Structural sort key (kind, then names), independent of provenance.
    pub fn canonical_key(&self) -> (u8, Vec<String>) {
        let parts = match self {
            Element::EntityType(t) => vec![t.name.clone(), t.supertype.clone().unwrap_or_default()],
            Element::RelationshipType { name, signature, .. } => {
                vec![name.clone(), signature.left.clone(), signature.right.clone()]
            }
            Element::Entity(e) => vec![e.name.clone(), e.ty.clone()],
            Element::Function(f) => vec![f.name.clone(), f.domain.clone(), f.range.clone()],
            Element::Relationship(r) => vec![r.subject.clone(), r.predicate.clone(), r.object.clone()],
            Element::Application(a) => vec![a.function.clone(), a.input.clone(), a.output.clone()],
            Element::Binding(b) => vec![b.subject.clone(), b.uri.clone()],
        };
        (self.kind_rank(), parts)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown name `{name}`")]
    UnknownName { name: String },
    #[error("unknown type `{name}`")]
    UnknownType { name: String },
    #[error("unknown relationship type `{name}`")]
    UnknownRelationshipType { name: String },
    #[error("`{name}` is not a function")]
    NotAFunction { name: String },
    #[error("conflicting declaration of `{name}`")]
    ConflictingDeclaration { name: String, previous: Option<SourceSpan> },
    #[error("type `{name}` would make the subtype lattice cyclic")]
    TypeCycle { name: String },
    #[error("binding of `{subject}` has an empty URI")]
    EmptyBinding { subject: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Megamodel {
    pub name: String,
    pub types: TypeTable,
    entities: IndexMap<String, Entity>,
    functions: IndexMap<String, FuncDecl>,
    relationships: Vec<RelStmt>,
    relationship_keys: HashSet<RelKey>,
    applications: Vec<FuncApp>,
    application_keys: HashSet<AppKey>,
    bindings: Vec<Binding>,
    binding_keys: HashSet<(String, String)>,
}

impl Megamodel {
    pub fn new(name: &str) -> Megamodel {
        Megamodel { name: name.to_string(), types: TypeTable::new(), ..Default::default() }
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn entity(&self, name: &str) -> Option<&Entity> {
        self.entities.get(name)
    }

    pub fn functions(&self) -> impl Iterator<Item = &FuncDecl> {
        self.functions.values()
    }

    pub fn function(&self, name: &str) -> Option<&FuncDecl> {
        self.functions.get(name)
    }

    pub fn relationships(&self) -> &[RelStmt] {
        &self.relationships
    }

    pub fn has_relationship(&self, subject: &str, predicate: &str, object: &str) -> bool {
        self.relationship_keys.contains(&RelKey {
            subject: subject.to_string(),
            predicate: predicate.to_string(),
            object: object.to_string(),
        })
    }

    pub fn relationships_with(&self, predicate: &str) -> impl Iterator<Item = &RelStmt> + '_ {
        let predicate = predicate.to_string();
        self.relationships.iter().filter(move |r| r.predicate == predicate)
    }

    pub fn applications(&self) -> &[FuncApp] {
        &self.applications
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn bindings_of<'a>(&'a self, subject: &'a str) -> impl Iterator<Item = &'a Binding> + 'a {
        self.bindings.iter().filter(move |b| b.subject == subject)
    }

    /// Number of relationship statements plus function applications.
    pub fn statement_count(&self) -> usize {
        self.relationships.len() + self.applications.len()
    }

    /// Declared type of an entity.
    pub fn type_of(&self, name: &str) -> Result<&str, ModelError> {
        self.entities.get(name).map(|e| e.ty.as_str()).ok_or_else(|| ModelError::UnknownName { name: name.to_string() })
    }

    /// Whether entity `name` has a type that is a subtype of `ty`.
    pub fn is_a(&self, name: &str, ty: &str) -> bool {
        self.entities.get(name).is_some_and(|e| self.types.subtype_of(&e.ty, ty).unwrap_or(false))
    }

    /// Whether `name` is declared anywhere in the namespace.
    pub fn is_declared(&self, name: &str) -> bool {
        self.entities.contains_key(name) || self.types.contains(name)
    }

    fn previous_span(&self, name: &str) -> Option<SourceSpan> {
        if let Some(e) = self.entities.get(name) {
            if e.origin != Origin::Reflected {
                return e.span.clone();
            }
        }
        self.types.span_of(name)
    }

    fn conflict(&self, name: &str) -> ModelError {
        ModelError::ConflictingDeclaration { name: name.to_string(), previous: self.previous_span(name) }
    }

    fn require_entity(&self, name: &str) -> Result<(), ModelError> {
        if self.entities.contains_key(name) {
            Ok(())
        } else {
            Err(ModelError::UnknownName { name: name.to_string() })
        }
    }

    /// Insert an element. Returns `Ok(true)` if the model grew and `Ok(false)`
    /// if the element was a structural duplicate.
    pub fn add(&mut self, element: Element) -> Result<bool, ModelError> {
        match element {
            Element::EntityType(ty) => {
                if self.types.relationship_type(&ty.name).is_some()
                    || self.entities.get(&ty.name).is_some_and(|e| e.origin != Origin::Reflected)
                {
                    return Err(self.conflict(&ty.name));
                }
                match self.types.entity_type(&ty.name) {
                    Some(existing) if existing.supertype == ty.supertype => return Ok(false),
                    Some(_) => return Err(self.conflict(&ty.name)),
                    None => {}
                }
                self.types.insert_entity_type(ty)?;
                Ok(true)
            }
            Element::RelationshipType { name, signature, origin, span } => {
                if self.types.entity_type(&name).is_some()
                    || self.entities.get(&name).is_some_and(|e| e.origin != Origin::Reflected)
                {
                    return Err(self.conflict(&name));
                }
                self.types.insert_signature(&name, signature, origin, span)
            }
            Element::Entity(entity) => {
                if self.types.contains(&entity.name) {
                    return Err(self.conflict(&entity.name));
                }
                if self.types.entity_type(&entity.ty).is_none() {
                    return Err(ModelError::UnknownName { name: entity.ty.clone() });
                }
                if let Some(existing) = self.entities.get(&entity.name) {
                    if existing.ty == entity.ty
                        && existing.cardinality == entity.cardinality
                        && !self.functions.contains_key(&entity.name)
                    {
                        return Ok(false);
                    }
                    return Err(self.conflict(&entity.name));
                }
                self.entities.insert(entity.name.clone(), entity);
                Ok(true)
            }
            Element::Function(func) => {
                if self.types.contains(&func.name) {
                    return Err(self.conflict(&func.name));
                }
                self.require_entity(&func.domain)?;
                self.require_entity(&func.range)?;
                if let Some(existing) = self.functions.get(&func.name) {
                    if existing.domain == func.domain && existing.range == func.range {
                        return Ok(false);
                    }
                    return Err(self.conflict(&func.name));
                }
                if self.entities.contains_key(&func.name) {
                    return Err(self.conflict(&func.name));
                }
                if self.types.entity_type(names::FUNCTION).is_none() {
                    return Err(ModelError::UnknownType { name: names::FUNCTION.to_string() });
                }
                self.entities.insert(
                    func.name.clone(),
                    Entity {
                        name: func.name.clone(),
                        ty: names::FUNCTION.to_string(),
                        cardinality: Cardinality::One,
                        origin: func.origin.clone(),
                        span: func.span.clone(),
                    },
                );
                self.functions.insert(func.name.clone(), func);
                Ok(true)
            }
            Element::Relationship(rel) => {
                self.require_entity(&rel.subject)?;
                if self.types.relationship_type(&rel.predicate).is_none() {
                    return Err(ModelError::UnknownRelationshipType { name: rel.predicate.clone() });
                }
                self.require_entity(&rel.object)?;
                let key = rel.key();
                if self.relationship_keys.contains(&key) {
                    return Ok(false);
                }
                self.relationship_keys.insert(key);
                self.relationships.push(rel);
                Ok(true)
            }
            Element::Application(app) => {
                self.require_entity(&app.function)?;
                if !self.functions.contains_key(&app.function) {
                    return Err(ModelError::NotAFunction { name: app.function.clone() });
                }
                self.require_entity(&app.input)?;
                self.require_entity(&app.output)?;
                let key = app.key();
                if self.application_keys.contains(&key) {
                    return Ok(false);
                }
                self.application_keys.insert(key);
                self.applications.push(app);
                Ok(true)
            }
            Element::Binding(binding) => {
                self.require_entity(&binding.subject)?;
                if binding.uri.is_empty() {
                    return Err(ModelError::EmptyBinding { subject: binding.subject });
                }
                let key = (binding.subject.clone(), binding.uri.clone());
                if self.binding_keys.contains(&key) {
                    return Ok(false);
                }
                self.binding_keys.insert(key);
                self.bindings.push(binding);
                Ok(true)
            }
        }
    }

    /// Make every declared type available as an entity (of type `EntityType`
    /// or `RelationshipType`) so that types can appear as statement operands.
    /// Idempotent.
    pub fn reflect(&mut self) {
        let mut reflected = Vec::new();
        if self.types.entity_type(names::ENTITY_TYPE).is_some() {
            for ty in self.types.entity_types() {
                reflected.push((ty.name.clone(), names::ENTITY_TYPE));
            }
        }
        if self.types.entity_type(names::RELATIONSHIP_TYPE).is_some() {
            for ty in self.types.relationship_types() {
                reflected.push((ty.name.clone(), names::RELATIONSHIP_TYPE));
            }
        }
        for (name, ty) in reflected {
            if !self.entities.contains_key(&name) {
                self.entities.insert(
                    name.clone(),
                    Entity {
                        name,
                        ty: ty.to_string(),
                        cardinality: Cardinality::One,
                        origin: Origin::Reflected,
                        span: None,
                    },
                );
            }
        }
    }

    /// Entities, functions, relationships, applications and bindings as
    /// elements, in insertion order. Types are not included.
    pub fn elements(&self) -> Vec<Element> {
        let mut out: Vec<Element> = Vec::new();
        out.extend(self.entities.values().cloned().map(Element::Entity));
        out.extend(self.functions.values().cloned().map(Element::Function));
        out.extend(self.relationships.iter().cloned().map(Element::Relationship));
        out.extend(self.applications.iter().cloned().map(Element::Application));
        out.extend(self.bindings.iter().cloned().map(Element::Binding));
        out
    }

    /// Builder-style insertion producing a new revision.
    pub fn with(mut self, element: Element) -> Result<Megamodel, ModelError> {
        self.add(element)?;
        Ok(self)
    }

    /// Whether the model contains an element structurally equal to `element`.
    pub fn contains(&self, element: &Element) -> bool {
        match element {
            Element::EntityType(t) => self.types.entity_type(&t.name).is_some_and(|x| x.supertype == t.supertype),
            Element::RelationshipType { name, signature, .. } => {
                self.types.relationship_type(name).is_some_and(|r| r.signatures.contains(signature))
            }
            Element::Entity(e) => {
                self.entities.get(&e.name).is_some_and(|x| x.ty == e.ty && x.cardinality == e.cardinality)
            }
            Element::Function(f) => {
                self.functions.get(&f.name).is_some_and(|x| x.domain == f.domain && x.range == f.range)
            }
            Element::Relationship(r) => self.relationship_keys.contains(&r.key()),
            Element::Application(a) => self.application_keys.contains(&a.key()),
            Element::Binding(b) => self.binding_keys.contains(&(b.subject.clone(), b.uri.clone())),
        }
    }
}
