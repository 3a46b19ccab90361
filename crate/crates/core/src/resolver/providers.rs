//! Built-in artifact providers. Registration order is fixed: directory,
//! archive, xml, search-path, transient.

use std::collections::BTreeSet;
use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;
use std::sync::Arc;

use super::object::{ObjectKind, Payload, ResourceObject};
use super::{join_identity, ResolveError, Workspace};

/// Navigation contract for one kind of resource.
pub trait Provider: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether this provider can navigate in `x`.
    fn accept(&self, x: &ResourceObject) -> bool;

    /// Segment names that can be navigated to from `x`, in enumeration order.
    fn next(&self, ws: &Workspace, x: &ResourceObject) -> Vec<String>;

    /// Objects reached from `x` by `key`; empty if `key` is not in `next(x)`.
    fn navigate(&self, ws: &Workspace, x: &ResourceObject, key: &str) -> Result<Vec<ResourceObject>, ResolveError>;
}

pub fn builtin_providers() -> Vec<Box<dyn Provider>> {
    vec![
        Box::new(DirectoryProvider),
        Box::new(ArchiveProvider),
        Box::new(XmlProvider),
        Box::new(SearchPathProvider),
        Box::new(TransientProvider),
    ]
}

fn sorted_entries(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    names.sort();
    names
}

fn disk_object(ws: &Workspace, path: &Path, ordinal: usize) -> ResourceObject {
    let identity = ws.identity_of(path);
    if path.is_dir() {
        ResourceObject::new(ObjectKind::Directory, identity, ordinal, Payload::Dir(path.to_path_buf()))
    } else {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        ResourceObject::new(ObjectKind::for_file_name(&name), identity, ordinal, Payload::File(path.to_path_buf()))
    }
}

/// Directory entries on disk, sorted by name.
pub struct DirectoryProvider;

impl Provider for DirectoryProvider {
    fn name(&self) -> &'static str {
        "directory"
    }

    fn accept(&self, x: &ResourceObject) -> bool {
        matches!(x.payload, Payload::Dir(_))
    }

    fn next(&self, _ws: &Workspace, x: &ResourceObject) -> Vec<String> {
        match &x.payload {
            Payload::Dir(dir) => sorted_entries(dir),
            _ => Vec::new(),
        }
    }

    fn navigate(&self, ws: &Workspace, x: &ResourceObject, key: &str) -> Result<Vec<ResourceObject>, ResolveError> {
        let entries = self.next(ws, x);
        let (Some(ordinal), Payload::Dir(dir)) = (entries.iter().position(|e| e == key), &x.payload) else {
            return Ok(Vec::new());
        };
        Ok(vec![disk_object(ws, &dir.join(key), ordinal)])
    }
}

/// Entries of zip archives (`.zip`, `.jar`), including archives nested in
/// archives. Entries are listed in name order.
pub struct ArchiveProvider;

struct ArchiveView {
    bytes: Arc<[u8]>,
    prefix: String,
}

/// One immediate child of an archive directory.
struct ArchiveChild {
    name: String,
    is_dir: bool,
}

impl ArchiveProvider {
    fn view(x: &ResourceObject) -> Option<ArchiveView> {
        match &x.payload {
            Payload::ArchiveDir { archive, prefix } => {
                Some(ArchiveView { bytes: archive.clone(), prefix: prefix.clone() })
            }
            _ if x.kind == ObjectKind::Archive => x.bytes().map(|bytes| ArchiveView { bytes, prefix: String::new() }),
            _ => None,
        }
    }

    fn children(view: &ArchiveView) -> Vec<ArchiveChild> {
        let Ok(archive) = zip::ZipArchive::new(Cursor::new(&view.bytes[..])) else {
            return Vec::new();
        };
        let mut seen = BTreeSet::new();
        let mut dirs = BTreeSet::new();
        for name in archive.file_names() {
            let Some(rest) = name.strip_prefix(&view.prefix) else { continue };
            let mut parts = rest.splitn(2, '/');
            let first = parts.next().unwrap_or_default();
            if first.is_empty() {
                continue;
            }
            seen.insert(first.to_string());
            if parts.next().is_some() {
                dirs.insert(first.to_string());
            }
        }
        seen.into_iter().map(|name| ArchiveChild { is_dir: dirs.contains(&name), name }).collect()
    }

    fn read_entry(bytes: &[u8], name: &str) -> Option<Vec<u8>> {
        let mut archive = zip::ZipArchive::new(Cursor::new(bytes)).ok()?;
        let mut file = archive.by_name(name).ok()?;
        let mut buf = Vec::new();
        file.read_to_end(&mut buf).ok()?;
        Some(buf)
    }
}

impl Provider for ArchiveProvider {
    fn name(&self) -> &'static str {
        "archive"
    }

    fn accept(&self, x: &ResourceObject) -> bool {
        matches!(x.payload, Payload::ArchiveDir { .. })
            || (x.kind == ObjectKind::Archive && matches!(x.payload, Payload::File(_) | Payload::Bytes(_)))
    }

    fn next(&self, _ws: &Workspace, x: &ResourceObject) -> Vec<String> {
        Self::view(x).map(|v| Self::children(&v).into_iter().map(|c| c.name).collect()).unwrap_or_default()
    }

    fn navigate(&self, _ws: &Workspace, x: &ResourceObject, key: &str) -> Result<Vec<ResourceObject>, ResolveError> {
        let Some(view) = Self::view(x) else { return Ok(Vec::new()) };
        let children = Self::children(&view);
        let Some(ordinal) = children.iter().position(|c| c.name == key) else {
            return Ok(Vec::new());
        };
        let identity = join_identity(&x.identity, key);
        let entry = format!("{}{key}", view.prefix);
        if children[ordinal].is_dir {
            let prefix = format!("{entry}/");
            return Ok(vec![ResourceObject::new(
                ObjectKind::Directory,
                identity,
                ordinal,
                Payload::ArchiveDir { archive: view.bytes, prefix },
            )]);
        }
        let bytes = Self::read_entry(&view.bytes, &entry).unwrap_or_default();
        Ok(vec![ResourceObject::new(
            ObjectKind::for_file_name(key),
            identity,
            ordinal,
            Payload::Bytes(Arc::from(bytes)),
        )])
    }
}

/// XML documents and elements. A document's only segment is its root tag;
/// an element's segments are the distinct tags of its children, and
/// navigating a tag yields all children with that tag in document order.
pub struct XmlProvider;

impl Provider for XmlProvider {
    fn name(&self) -> &'static str {
        "xml"
    }

    fn accept(&self, x: &ResourceObject) -> bool {
        match x.kind {
            ObjectKind::XmlElement => true,
            ObjectKind::Archive | ObjectKind::Directory | ObjectKind::Workspace => false,
            _ => x.xml_root().is_some(),
        }
    }

    fn next(&self, _ws: &Workspace, x: &ResourceObject) -> Vec<String> {
        if let Some(elem) = x.element() {
            return elem.child_tags().into_iter().map(str::to_string).collect();
        }
        x.xml_root().map(|root| vec![root.tag.clone()]).unwrap_or_default()
    }

    fn navigate(&self, _ws: &Workspace, x: &ResourceObject, key: &str) -> Result<Vec<ResourceObject>, ResolveError> {
        if let Some((root, path)) = x.element_path() {
            let Some(elem) = x.element() else { return Ok(Vec::new()) };
            let found = elem
                .children
                .iter()
                .enumerate()
                .filter(|(_, c)| c.tag == key)
                .enumerate()
                .map(|(k, (i, _))| {
                    let mut child_path = path.to_vec();
                    child_path.push(i);
                    ResourceObject::new(
                        ObjectKind::XmlElement,
                        join_identity(&x.identity, &format!("{key}#{k}")),
                        i,
                        Payload::Element { root: root.clone(), path: child_path },
                    )
                })
                .collect();
            return Ok(found);
        }
        match x.xml_root() {
            Some(root) if root.tag == key => Ok(vec![ResourceObject::new(
                ObjectKind::XmlElement,
                join_identity(&x.identity, &format!("{key}#0")),
                0,
                Payload::Element { root, path: Vec::new() },
            )]),
            _ => Ok(Vec::new()),
        }
    }
}

/// `classpath:` lookups over the configured search roots, first root wins.
pub struct SearchPathProvider;

impl Provider for SearchPathProvider {
    fn name(&self) -> &'static str {
        "search-path"
    }

    fn accept(&self, x: &ResourceObject) -> bool {
        matches!(x.payload, Payload::SearchRoots(_))
    }

    fn next(&self, _ws: &Workspace, x: &ResourceObject) -> Vec<String> {
        let Payload::SearchRoots(roots) = &x.payload else { return Vec::new() };
        let names: BTreeSet<String> = roots.iter().flat_map(|r| sorted_entries(r)).collect();
        names.into_iter().collect()
    }

    fn navigate(&self, ws: &Workspace, x: &ResourceObject, key: &str) -> Result<Vec<ResourceObject>, ResolveError> {
        let Payload::SearchRoots(roots) = &x.payload else { return Ok(Vec::new()) };
        let Some(ordinal) = self.next(ws, x).iter().position(|n| n == key) else {
            return Ok(Vec::new());
        };
        for root in roots {
            let path = root.join(key);
            if path.exists() {
                return Ok(vec![disk_object(ws, &path, ordinal)]);
            }
        }
        Ok(Vec::new())
    }
}

/// `transient:` objects, captured on first navigation.
pub struct TransientProvider;

impl Provider for TransientProvider {
    fn name(&self) -> &'static str {
        "transient"
    }

    fn accept(&self, x: &ResourceObject) -> bool {
        matches!(x.payload, Payload::Transients)
    }

    fn next(&self, ws: &Workspace, _x: &ResourceObject) -> Vec<String> {
        ws.transients.keys().cloned().collect()
    }

    fn navigate(&self, ws: &Workspace, _x: &ResourceObject, key: &str) -> Result<Vec<ResourceObject>, ResolveError> {
        if !ws.transients.contains_key(key) {
            return Ok(Vec::new());
        }
        ws.capture_transient(key).map(|o| vec![o]).map_err(ResolveError::Transient)
    }
}
