use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    Workspace,
    Directory,
    File,
    Archive,
    XmlDocument,
    XmlElement,
    Bytes,
    Transient,
}

impl ObjectKind {
    /// Kind of a file-like object, judged by its name.
    pub fn for_file_name(name: &str) -> ObjectKind {
        let ext = name.rsplit_once('.').map(|(_, e)| e.to_ascii_lowercase()).unwrap_or_default();
        match ext.as_str() {
            "zip" | "jar" => ObjectKind::Archive,
            "xml" | "xsd" | "xmi" | "ecore" => ObjectKind::XmlDocument,
            _ => ObjectKind::File,
        }
    }

    /// Whether parts can be enumerated below objects of this kind.
    pub fn is_compound(self) -> bool {
        matches!(
            self,
            ObjectKind::Workspace
                | ObjectKind::Directory
                | ObjectKind::Archive
                | ObjectKind::XmlDocument
                | ObjectKind::XmlElement
        )
    }
}

/// Owned XML element tree. Tags keep their source prefix (`xs:element`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlElement {
    pub tag: String,
    pub attributes: Vec<(String, String)>,
    pub children: Vec<XmlElement>,
    /// Concatenated direct text content.
    pub text: String,
}

impl XmlElement {
    pub fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    /// Tag without namespace prefix.
    pub fn local_name(&self) -> &str {
        self.tag.rsplit_once(':').map_or(&self.tag, |(_, local)| local)
    }

    /// Distinct child tags in document order.
    pub fn child_tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = Vec::new();
        for child in &self.children {
            if !tags.contains(&child.tag.as_str()) {
                tags.push(&child.tag);
            }
        }
        tags
    }

    /// All elements of the subtree in document order, including `self`.
    pub fn descendants(&self) -> Vec<&XmlElement> {
        let mut out = vec![self];
        for child in &self.children {
            out.extend(child.descendants());
        }
        out
    }
}

fn qualified(node: roxmltree::Node<'_, '_>, ns: Option<&str>, local: &str) -> String {
    match ns.and_then(|uri| node.lookup_prefix(uri)) {
        Some(prefix) if !prefix.is_empty() => format!("{prefix}:{local}"),
        _ => local.to_string(),
    }
}

fn convert(node: roxmltree::Node<'_, '_>) -> XmlElement {
    let name = node.tag_name();
    let mut text = String::new();
    let mut children = Vec::new();
    for child in node.children() {
        if child.is_element() {
            children.push(convert(child));
        } else if child.is_text() {
            text.push_str(child.text().unwrap_or_default());
        }
    }
    XmlElement {
        tag: qualified(node, name.namespace(), name.name()),
        attributes: node
            .attributes()
            .map(|a| (qualified(node, a.namespace(), a.name()), a.value().to_string()))
            .collect(),
        children,
        text,
    }
}

/// Parse a document and return its root element.
pub fn parse_xml(bytes: &[u8]) -> Result<XmlElement, String> {
    let text = std::str::from_utf8(bytes).map_err(|e| format!("not UTF-8: {e}"))?;
    let options = roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() };
    let doc = roxmltree::Document::parse_with_options(text, options).map_err(|e| e.to_string())?;
    Ok(convert(doc.root_element()))
}

#[derive(Debug, Clone)]
pub(crate) enum Payload {
    /// Workspace root, alias root or directory on disk.
    Dir(PathBuf),
    File(PathBuf),
    Bytes(Arc<[u8]>),
    /// Directory inside an archive; `prefix` ends with `/` unless empty.
    ArchiveDir {
        archive: Arc<[u8]>,
        prefix: String,
    },
    Element {
        root: Arc<XmlElement>,
        path: Vec<usize>,
    },
    SearchRoots(Vec<PathBuf>),
    Transients,
}

/// A node of the resolved-artifact tree.
#[derive(Debug, Clone)]
pub struct ResourceObject {
    pub kind: ObjectKind,
    /// Canonical path from the workspace root. XML elements always carry an
    /// explicit `#k` index.
    pub identity: String,
    /// Position among the siblings enumerated by the parent's provider.
    pub ordinal: usize,
    pub(crate) payload: Payload,
    xml: Arc<OnceLock<Option<Arc<XmlElement>>>>,
}

impl PartialEq for ResourceObject {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.identity == other.identity
    }
}

impl Eq for ResourceObject {}

impl ResourceObject {
    pub(crate) fn new(kind: ObjectKind, identity: String, ordinal: usize, payload: Payload) -> ResourceObject {
        ResourceObject { kind, identity, ordinal, payload, xml: Arc::default() }
    }

    /// Last identity segment without its index.
    pub fn name(&self) -> &str {
        let last = self.identity.rsplit('/').next().unwrap_or_default();
        last.rsplit_once('#').map_or(last, |(n, _)| n)
    }

    /// On-disk location, for directories and files.
    pub fn path(&self) -> Option<&Path> {
        match &self.payload {
            Payload::Dir(p) | Payload::File(p) => Some(p),
            _ => None,
        }
    }

    /// Content of byte-bearing objects.
    pub fn bytes(&self) -> Option<Arc<[u8]>> {
        match &self.payload {
            Payload::File(p) => fs::read(p).ok().map(Arc::from),
            Payload::Bytes(b) => Some(b.clone()),
            _ => None,
        }
    }

    /// Root element of byte-bearing objects that parse as XML. Parsed once.
    pub fn xml_root(&self) -> Option<Arc<XmlElement>> {
        if !matches!(self.payload, Payload::File(_) | Payload::Bytes(_)) {
            return None;
        }
        self.xml.get_or_init(|| self.bytes().and_then(|b| parse_xml(&b).ok()).map(Arc::new)).clone()
    }

    /// The element of an `XmlElement` object.
    pub fn element(&self) -> Option<&XmlElement> {
        match &self.payload {
            Payload::Element { root, path } => {
                let mut cur: &XmlElement = root;
                for &i in path {
                    cur = &cur.children[i];
                }
                Some(cur)
            }
            _ => None,
        }
    }

    /// Shared root and child-index path of an `XmlElement` object.
    pub(crate) fn element_path(&self) -> Option<(&Arc<XmlElement>, &[usize])> {
        match &self.payload {
            Payload::Element { root, path } => Some((root, path)),
            _ => None,
        }
    }
}
