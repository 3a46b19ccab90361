//! Well-formedness and type checking of a linked megamodel. No artifact
//! access happens here.
//!
//! Name resolution errors (E001, E002, E004, E005) are reported while linking,
//! because the model refuses to store ill-referenced elements. This module
//! adds the checks that need the whole model.

use std::collections::BTreeSet;

use crate::diagnostics::Diagnostic;
use crate::model::{names, Cardinality, FuncApp, Megamodel, ModelError, Origin, RelStmt};
use crate::resolver::{is_resolvable, parse_uri};

/// Declared type of an entity.
pub fn type_of<'m>(model: &'m Megamodel, name: &str) -> Result<&'m str, ModelError> {
    model.type_of(name)
}

/// Accept a relationship if some signature matches, subtype-aware, trying
/// overloads in declaration order. `facilitates` with a non-Concept object is
/// a warning rather than an error.
pub fn check_relationship(model: &Megamodel, rel: &RelStmt) -> Option<Diagnostic> {
    let rel_type = model.types.relationship_type(&rel.predicate)?;
    let (Ok(left), Ok(right)) = (model.type_of(&rel.subject), model.type_of(&rel.object)) else {
        return None;
    };
    let matches = rel_type.signatures.iter().any(|sig| {
        model.types.subtype_of(left, &sig.left).unwrap_or(false)
            && model.types.subtype_of(right, &sig.right).unwrap_or(false)
    });
    if matches {
        return None;
    }
    if rel.predicate == names::FACILITATES {
        return Some(
            Diagnostic::warning(
                "W102",
                format!("`{}` facilitates `{}`, which is a {right}, not a Concept", rel.subject, rel.object),
            )
            .with_span(rel.span.clone()),
        );
    }
    let sigs: Vec<String> = rel_type.signatures.iter().map(|s| format!("({}, {})", s.left, s.right)).collect();
    Some(
        Diagnostic::error(
            "E003",
            format!(
                "`{} {} {}` has operand types ({left}, {right}), which match no signature of `{}`: {}",
                rel.subject,
                rel.predicate,
                rel.object,
                rel.predicate,
                sigs.join(", ")
            ),
        )
        .with_span(rel.span.clone()),
    )
}

/// Languages reachable from `lang` by zero or more `subsetOf` steps.
fn supersets(model: &Megamodel, lang: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([lang.to_string()]);
    let mut stack = vec![lang.to_string()];
    while let Some(cur) = stack.pop() {
        for rel in model.relationships_with(names::SUBSET_OF).filter(|r| r.subject == cur) {
            if seen.insert(rel.object.clone()) {
                stack.push(rel.object.clone());
            }
        }
    }
    seen
}

/// Whether `x elementOf lang` is derivable from `elementOf` facts and
/// `subsetOf` chains.
pub fn element_of_derivable(model: &Megamodel, x: &str, lang: &str) -> bool {
    model
        .relationships_with(names::ELEMENT_OF)
        .filter(|r| r.subject == x)
        .any(|r| supersets(model, &r.object).contains(lang))
}

fn check_application(model: &Megamodel, app: &FuncApp, out: &mut Vec<Diagnostic>) {
    let Some(func) = model.function(&app.function) else { return };
    for (operand, lang, role) in [(&app.input, &func.domain, "input"), (&app.output, &func.range, "output")] {
        if !element_of_derivable(model, operand, lang) {
            out.push(
                Diagnostic::warning(
                    "W101",
                    format!("{role} `{operand}` of `{}` has no derivable `elementOf {lang}`", app.function),
                )
                .with_span(app.span.clone()),
            );
        }
    }
}

fn is_user_element(origin: &Origin) -> bool {
    matches!(origin, Origin::Declared | Origin::Imported { .. })
}

/// All model-only checks, in declaration order.
pub fn check_well_formed(model: &Megamodel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for func in model.functions() {
        for (role, lang) in [("domain", &func.domain), ("range", &func.range)] {
            if !model.is_a(lang, names::LANGUAGE) {
                out.push(
                    Diagnostic::error("E008", format!("{role} `{lang}` of function `{}` is not a Language", func.name))
                        .with_span(func.span.clone()),
                );
            }
        }
    }
    for rel in model.relationships() {
        out.extend(check_relationship(model, rel));
    }
    for app in model.applications() {
        check_application(model, app, &mut out);
    }
    for binding in model.bindings() {
        if is_resolvable(model, &binding.subject) {
            if let Err(err) = parse_uri(&binding.uri) {
                out.push(Diagnostic::error("E007", err.to_string()).with_span(binding.span.clone()));
            }
        }
    }
    for entity in model.entities() {
        if !is_user_element(&entity.origin) || !is_resolvable(model, &entity.name) {
            continue;
        }
        let bindings: Vec<_> = model.bindings_of(&entity.name).collect();
        if bindings.is_empty() {
            out.push(
                Diagnostic::warning(
                    "W103",
                    format!("artifact `{}` has no binding; verification will be partial", entity.name),
                )
                .with_span(entity.span.clone()),
            );
        } else if entity.cardinality == Cardinality::One && bindings.len() > 1 {
            out.push(
                Diagnostic::error(
                    "E006",
                    format!("`{}` is declared as one artifact but has {} bindings", entity.name, bindings.len()),
                )
                .with_span(bindings[1].span.clone())
                .with_related(bindings[0].span.clone()),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linker::{link, load_graph, MapLoader, ModuleLoader};

    fn model_of(text: &str) -> Megamodel {
        let loader = MapLoader::new().with("M", text);
        let out = link(&load_graph(loader.load("M").unwrap().unwrap(), &loader).unwrap());
        assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
        out.model
    }

    fn codes(diags: &[Diagnostic]) -> Vec<&str> {
        diags.iter().map(|d| d.code).collect()
    }

    #[test]
    fn languages_do_not_conform() {
        let m = model_of("module M\nXML : Language\nXSD : Language\nXML conformsTo XSD");
        let d = check_well_formed(&m);
        assert_eq!(codes(&d), ["E003"]);
        assert_eq!(d[0].span.as_ref().unwrap().line, 4);
    }

    #[test]
    fn overloads() {
        let m = model_of(
            "module M\nEcore : Language\nCustom : Language\nmetaMetaModel : Artifact\natlmodule : Artifact\n\
             transformation : Custom -> Custom\nPersistence : Concept\nXML : Language\n\
             metaMetaModel defines Ecore\natlmodule defines transformation\nPersistence defines XML",
        );
        let rels = m.relationships();
        assert!(check_relationship(&m, &rels[0]).is_none());
        assert!(check_relationship(&m, &rels[1]).is_none());
        assert_eq!(check_relationship(&m, &rels[2]).unwrap().code, "E003");
    }

    #[test]
    fn type_lookup() {
        let m = model_of("module M\nobjectGraph : Transient\nPersistence : Concept");
        assert_eq!(type_of(&m, "objectGraph").unwrap(), "Transient");
        assert_eq!(type_of(&m, "Persistence").unwrap(), "Concept");
        assert!(type_of(&m, "nope").is_err());
    }

    #[test]
    fn unbound_artifacts_warn() {
        let m = model_of("module M\nXML : Language\nxmlFile : Artifact\nxsdFiles : Artifact+\nxmlFile elementOf XML");
        assert_eq!(codes(&check_well_formed(&m)), ["W103", "W103"]);
    }

    #[test]
    fn application_without_element_of() {
        let text =
            "module M\nCustom : Language\ntransformation : Custom -> Custom\ninput : Artifact\noutput : Artifact\n\
                    input = \"a\"\noutput = \"b\"\ntransformation(input) |-> output\n";
        let m = model_of(text);
        assert_eq!(codes(&check_well_formed(&m)), ["W101", "W101"]);
        let m = model_of(&format!("{text}input elementOf Custom\noutput elementOf Custom\n"));
        assert!(check_well_formed(&m).is_empty());
    }

    #[test]
    fn element_of_via_subset_chain() {
        let m = model_of(
            "module M\nA : Language\nB : Language\nC : Language\nx : Artifact\nx elementOf A\nA subsetOf B\nB subsetOf C",
        );
        assert!(element_of_derivable(&m, "x", "C"));
        assert!(!element_of_derivable(&m, "x", "D"));
    }

    #[test]
    fn double_binding_and_bad_uri() {
        let m = model_of("module M\nx : Artifact\nx = \"a.xml\"\nx = \"b.xml\"\ny : Artifact+\ny = \"a//b\"");
        let d = check_well_formed(&m);
        assert_eq!(codes(&d), ["E007", "E006"]);
        assert_eq!(d[1].span.as_ref().unwrap().line, 4);
    }

    #[test]
    fn facilitates_non_concept() {
        let m = model_of("module M\nXML : Language\nJava : Language\nJava facilitates XML");
        assert_eq!(codes(&check_well_formed(&m)), ["W102"]);
    }

    #[test]
    fn function_domain_must_be_language() {
        let m = model_of("module M\na : Artifact\nb : Artifact\na = \"x\"\nb = \"y\"\nf : a -> b");
        assert_eq!(codes(&check_well_formed(&m)), ["E008", "E008"]);
    }
}
