use super::{InferenceContext, Inferred, Inferrer};
use crate::model::{names, Binding, Cardinality, Element, Entity, Megamodel, Origin, RelStmt};
use crate::resolver::{is_resolvable, Child, ObjectKind, ResourceObject, Workspace};

fn inferred_rel(subject: &str, predicate: &str, object: &str, rule: &str) -> Element {
    Element::Relationship(RelStmt::new(subject, predicate, object, Origin::inferred(rule)))
}

/// `a subsetOf b`, `b subsetOf c` ⇒ `a subsetOf c`.
pub struct SubsetTransitivity;

impl Inferrer for SubsetTransitivity {
    fn name(&self) -> &str {
        "subsetTransitivity"
    }

    fn applies_to(&self, element: &Element) -> bool {
        matches!(element, Element::Relationship(r) if r.predicate == names::SUBSET_OF)
    }

    fn infer(&self, ctx: &InferenceContext<'_>, element: &Element) -> Result<Inferred, String> {
        let Element::Relationship(ab) = element else { return Ok(Inferred::default()) };
        let additions = ctx
            .model
            .relationships_with(names::SUBSET_OF)
            .filter(|bc| {
                bc.subject == ab.object && !ctx.model.has_relationship(&ab.subject, names::SUBSET_OF, &bc.object)
            })
            .map(|bc| inferred_rel(&ab.subject, names::SUBSET_OF, &bc.object, self.name()))
            .collect();
        Ok(Inferred::of(additions))
    }
}

/// `x elementOf L`, `L subsetOf M` ⇒ `x elementOf M`.
pub struct ElementOfLifting;

impl Inferrer for ElementOfLifting {
    fn name(&self) -> &str {
        "elementOfLifting"
    }

    fn applies_to(&self, element: &Element) -> bool {
        matches!(element, Element::Relationship(r) if r.predicate == names::ELEMENT_OF)
    }

    fn infer(&self, ctx: &InferenceContext<'_>, element: &Element) -> Result<Inferred, String> {
        let Element::Relationship(xl) = element else { return Ok(Inferred::default()) };
        let additions = ctx
            .model
            .relationships_with(names::SUBSET_OF)
            .filter(|lm| {
                lm.subject == xl.object && !ctx.model.has_relationship(&xl.subject, names::ELEMENT_OF, &lm.object)
            })
            .map(|lm| inferred_rel(&xl.subject, names::ELEMENT_OF, &lm.object, self.name()))
            .collect();
        Ok(Inferred::of(additions))
    }
}

/// Identifier-safe version of a fragment name.
pub fn sanitize(name: &str) -> String {
    let mut out: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if out.chars().next().is_none_or(|c| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

/// Number of inferred `partOf` steps from `entity` up to a declared artifact.
fn fragment_depth(model: &Megamodel, entity: &str) -> usize {
    let mut depth = 0;
    let mut current = entity.to_string();
    while let Some(parent) =
        model.relationships_with(names::PART_OF).find(|r| r.subject == current && r.origin.is_inferred_by("parts"))
    {
        depth += 1;
        current = parent.object.clone();
        if depth > model.entities().count() {
            break;
        }
    }
    depth
}

/// Parts of a resolved object together with the URI segments leading to
/// each part. A document's parts are the children of its root element.
pub fn object_parts(ws: &Workspace, object: &ResourceObject) -> Vec<(Vec<String>, ResourceObject)> {
    let as_parts = |prefix: &[String], children: Vec<Child>| {
        children
            .into_iter()
            .map(|c| {
                let mut segs = prefix.to_vec();
                segs.push(c.segment.to_string());
                (segs, c.object)
            })
            .collect::<Vec<_>>()
    };
    match object.kind {
        ObjectKind::Directory | ObjectKind::Archive | ObjectKind::XmlElement | ObjectKind::Workspace => {
            as_parts(&[], ws.children(object))
        }
        _ if object.xml_root().is_some() => {
            let roots = ws.children(object);
            match roots.into_iter().next() {
                Some(root) => as_parts(&[root.segment.to_string()], ws.children(&root.object)),
                None => Vec::new(),
            }
        }
        _ => Vec::new(),
    }
}

/// Decomposes bound artifacts into fragment entities: one `Artifact` per
/// child of a directory, archive, XML document or element, related to its
/// parent by `partOf` and bound to the parent URI extended by the child's
/// segments. Recursion stops at the configured depth.
pub struct Parts;

impl Inferrer for Parts {
    fn name(&self) -> &str {
        "parts"
    }

    fn applies_to(&self, element: &Element) -> bool {
        matches!(element, Element::Entity(_))
    }

    fn infer(&self, ctx: &InferenceContext<'_>, element: &Element) -> Result<Inferred, String> {
        let Element::Entity(parent) = element else { return Ok(Inferred::default()) };
        if !is_resolvable(ctx.model, &parent.name) || fragment_depth(ctx.model, &parent.name) >= ctx.part_depth {
            return Ok(Inferred::default());
        }
        let bindings = ctx.bindings.bindings(&parent.name);
        let objects = ctx.bindings.objects(&parent.name);
        let single = bindings.len() == 1 && objects.len() == 1;
        let mut additions = Vec::new();
        for object in objects {
            for (segs, child) in object_parts(ctx.workspace, object) {
                let last = segs.last().cloned().unwrap_or_default();
                let (name, uri) = if single {
                    (sanitize(&format!("{}_{last}", parent.name)), format!("{}/{}", bindings[0].uri, segs.join("/")))
                } else {
                    (sanitize(&format!("{}_{}_{last}", parent.name, object.name())), child.identity.clone())
                };
                let origin = Origin::inferred(self.name());
                additions.push(Element::Entity(Entity {
                    name: name.clone(),
                    ty: names::ARTIFACT.to_string(),
                    cardinality: Cardinality::One,
                    origin: origin.clone(),
                    span: None,
                }));
                additions.push(inferred_rel(&name, names::PART_OF, &parent.name, self.name()));
                additions.push(Element::Binding(Binding { subject: name, uri, origin, span: None }));
            }
        }
        Ok(Inferred::of(additions))
    }
}

/// Binds unbound languages, technologies and concepts to entries of the
/// offline knowledge map. Explicit bindings are never overridden.
pub struct AnnotationScheme;

impl Inferrer for AnnotationScheme {
    fn name(&self) -> &str {
        "annotationScheme"
    }

    fn applies_to(&self, element: &Element) -> bool {
        matches!(element, Element::Entity(_))
    }

    fn infer(&self, ctx: &InferenceContext<'_>, element: &Element) -> Result<Inferred, String> {
        let Element::Entity(entity) = element else { return Ok(Inferred::default()) };
        let annotatable =
            [names::LANGUAGE, names::TECHNOLOGY, names::CONCEPT].iter().any(|ty| ctx.model.is_a(&entity.name, ty));
        if !annotatable || ctx.model.bindings_of(&entity.name).next().is_some() {
            return Ok(Inferred::default());
        }
        let additions = ctx
            .knowledge_map
            .get(&entity.name)
            .map(|url| {
                Element::Binding(Binding {
                    subject: entity.name.clone(),
                    uri: url.clone(),
                    origin: Origin::inferred(self.name()),
                    span: None,
                })
            })
            .into_iter()
            .collect();
        Ok(Inferred::of(additions))
    }
}
