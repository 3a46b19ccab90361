//! Name-based matching of fragments, shared by the `nameCorrespondence`
//! analysis and trace derivation.

use std::collections::BTreeSet;

use super::Link;
use crate::model::{names, Megamodel};
use crate::resolver::{BindingTable, ObjectKind};

/// Direct parts of `entity`, ordered by the position of their resolved
/// objects among their siblings, then by name.
pub fn direct_parts(model: &Megamodel, bindings: &BindingTable, entity: &str) -> Vec<String> {
    let mut parts: Vec<(usize, String)> = model
        .relationships_with(names::PART_OF)
        .filter(|r| r.object == entity && r.subject != entity)
        .map(|r| {
            let ordinal = bindings.objects(&r.subject).first().map_or(usize::MAX, |o| o.ordinal);
            (ordinal, r.subject.clone())
        })
        .collect();
    parts.sort();
    parts.dedup();
    parts.into_iter().map(|(_, name)| name).collect()
}

/// Transitive parts of `entity` in depth-first pre-order.
pub fn parts_of(model: &Megamodel, bindings: &BindingTable, entity: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::from([entity.to_string()]);
    collect(model, bindings, entity, &mut seen, &mut out);
    out
}

fn collect(
    model: &Megamodel,
    bindings: &BindingTable,
    entity: &str,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<String>,
) {
    for part in direct_parts(model, bindings, entity) {
        if seen.insert(part.clone()) {
            out.push(part.clone());
            collect(model, bindings, &part, seen, out);
        }
    }
}

/// Name a fragment goes by: an XML element's `name` attribute or local tag,
/// otherwise the file or directory name. Falls back to the entity name.
pub fn part_name(bindings: &BindingTable, part: &str) -> String {
    let Some(object) = bindings.objects(part).into_iter().next() else {
        return part.to_string();
    };
    match (object.kind, object.element()) {
        (ObjectKind::XmlElement, Some(elem)) => {
            elem.attribute("name").map_or_else(|| elem.local_name().to_string(), str::to_string)
        }
        _ => object.name().to_string(),
    }
}

/// Strip a `#k` marker, a namespace prefix and a file extension, then
/// case-fold.
pub fn normalize_name(raw: &str) -> String {
    let base = raw.rsplit_once('#').filter(|(_, k)| k.chars().all(|c| c.is_ascii_digit())).map_or(raw, |(n, _)| n);
    let base = base.rsplit_once(':').map_or(base, |(_, local)| local);
    let base = match base.rsplit_once('.') {
        Some((stem, _)) if !stem.is_empty() => stem,
        _ => base,
    };
    base.to_lowercase()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameMatch {
    pub links: Vec<Link>,
    pub unmatched_left: Vec<String>,
    pub unmatched_right: Vec<String>,
}

/// URI of `part` relative to the URI of `root`, used to pair structurally
/// congruent fragments.
fn relative_uri(model: &Megamodel, root: &str, part: &str) -> Option<String> {
    let root_uri = &model.bindings_of(root).next()?.uri;
    let uri = &model.bindings_of(part).next()?.uri;
    uri.strip_prefix(root_uri.as_str()).map(str::to_string)
}

/// Match every transitive part of `left` against the parts of `right` by
/// normalized name. When several right parts share the name, the one at the
/// same relative position is preferred if it exists.
pub fn match_parts(model: &Megamodel, bindings: &BindingTable, left: &str, right: &str) -> NameMatch {
    let left_parts = parts_of(model, bindings, left);
    let right_parts: Vec<(String, String, Option<String>)> = parts_of(model, bindings, right)
        .into_iter()
        .map(|p| {
            let name = normalize_name(&part_name(bindings, &p));
            let rel = relative_uri(model, right, &p);
            (p, name, rel)
        })
        .collect();
    let mut result = NameMatch::default();
    let mut matched_right = BTreeSet::new();
    for lp in &left_parts {
        let key = normalize_name(&part_name(bindings, lp));
        let candidates: Vec<&(String, String, Option<String>)> =
            right_parts.iter().filter(|(_, n, _)| *n == key).collect();
        if candidates.is_empty() {
            result.unmatched_left.push(lp.clone());
            continue;
        }
        let rel = relative_uri(model, left, lp);
        let positional: Vec<_> = candidates.iter().filter(|(_, _, r)| r.is_some() && *r == rel).collect();
        let chosen: Vec<&String> = if positional.len() == 1 {
            positional.iter().map(|(p, _, _)| p).collect()
        } else {
            candidates.iter().map(|(p, _, _)| p).collect()
        };
        for rp in chosen {
            matched_right.insert(rp.clone());
            result.links.push(Link { left: lp.clone(), right: rp.clone() });
        }
    }
    result.unmatched_right =
        right_parts.iter().map(|(p, _, _)| p.clone()).filter(|p| !matched_right.contains(p)).collect();
    result
}
