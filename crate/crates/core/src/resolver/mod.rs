//! Artifact binding: URIs are processed segment by segment, each step handled
//! by the first registered provider that accepts the current object and
//! offers the segment. This lets one URI cascade through a directory, into a
//! zip archive, into an XML document and down to an element.
//!
//! Resolution starts at the workspace root, at an alias root (`eclipse:`),
//! at the search roots (`classpath:`) or at the transient table
//! (`transient:`).

mod bindings;
mod object;
mod providers;
mod uri;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::config::{Capture, Config, TransientSpec};
use crate::process::{run_command, ProcessError};

pub use bindings::{is_resolvable, resolve_all_bindings, resolve_binding, BindingState, BindingTable, ResolvedBinding};
pub use object::{parse_xml, ObjectKind, ResourceObject, XmlElement};
pub use providers::{
    builtin_providers, ArchiveProvider, DirectoryProvider, Provider, SearchPathProvider, TransientProvider, XmlProvider,
};
pub use uri::{parse_uri, Segment, Uri, UriError};

use object::Payload;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransientError {
    #[error("transient `{name}` failed (exit {}): {message}", code.map_or("none".to_string(), |c| c.to_string()))]
    CommandFailed { name: String, code: Option<i32>, message: String },
    #[error("transient `{name}` timed out after {seconds}s")]
    Timeout { name: String, seconds: f64 },
    #[error("transient `{name}` did not produce {path}")]
    CaptureFileMissing { name: String, path: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResolveError {
    #[error(transparent)]
    MalformedUri(#[from] UriError),
    #[error("unknown URI scheme `{scheme}`")]
    UnknownScheme { scheme: String },
    #[error("no provider can navigate into `{identity}`")]
    NoProviderAccepts { identity: String },
    #[error("segment `{segment}` not found under `{identity}` (candidates: {})", candidates.join(", "))]
    SegmentNotFound { segment: String, identity: String, candidates: Vec<String> },
    #[error("segment `{segment}` is ambiguous: {count} candidates")]
    AmbiguousSegment { segment: String, count: usize },
    #[error(transparent)]
    Transient(TransientError),
}

/// Pipeline event, recorded in order for `--verbose` output and for checking
/// stage ordering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub stage: String,
    pub detail: String,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.detail)
    }
}

pub(crate) fn join_identity(parent: &str, segment: &str) -> String {
    if parent.is_empty() || parent.ends_with(':') {
        format!("{parent}{segment}")
    } else {
        format!("{parent}/{segment}")
    }
}

/// A child of an object as enumerated by its provider. `segment` carries an
/// index only when several siblings share the name.
#[derive(Debug, Clone)]
pub struct Child {
    pub segment: Segment,
    pub object: ResourceObject,
}

/// Root directory plus everything needed to resolve and capture artifacts.
/// Aliases and commands come from the config file only.
pub struct Workspace {
    pub root: PathBuf,
    pub aliases: BTreeMap<String, PathBuf>,
    pub search_paths: Vec<PathBuf>,
    pub transients: BTreeMap<String, TransientSpec>,
    providers: Vec<Box<dyn Provider>>,
    captures: Mutex<BTreeMap<String, Result<ResourceObject, TransientError>>>,
    events: Mutex<Vec<Event>>,
}

impl fmt::Debug for Workspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Workspace")
            .field("root", &self.root)
            .field("aliases", &self.aliases)
            .field("search_paths", &self.search_paths)
            .field("transients", &self.transients.keys().collect::<Vec<_>>())
            .field("providers", &self.providers.iter().map(|p| p.name()).collect::<Vec<_>>())
            .finish()
    }
}

/// Lexically normalize `.` and `..` components.
fn normalize(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for comp in path.components() {
        match comp {
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    out.push("..");
                }
            }
            other => out.push(other),
        }
    }
    out
}

impl Workspace {
    pub fn new(root: &Path) -> Workspace {
        let root = normalize(&std::path::absolute(root).unwrap_or_else(|_| root.to_path_buf()));
        Workspace {
            root,
            aliases: BTreeMap::new(),
            search_paths: Vec::new(),
            transients: BTreeMap::new(),
            providers: builtin_providers(),
            captures: Mutex::new(BTreeMap::new()),
            events: Mutex::new(Vec::new()),
        }
    }

    pub fn from_config(root: &Path, config: &Config) -> Workspace {
        let mut ws = Workspace::new(root);
        ws.aliases = config.aliases.iter().map(|(k, v)| (k.clone(), normalize(&ws.root.join(v)))).collect();
        ws.search_paths = config.search_paths.iter().map(|p| normalize(&ws.root.join(p))).collect();
        ws.transients = config.transients.clone();
        ws
    }

    /// Register an additional provider after the built-in ones.
    pub fn with_provider(mut self, provider: Box<dyn Provider>) -> Workspace {
        self.providers.push(provider);
        self
    }

    pub fn providers(&self) -> &[Box<dyn Provider>] {
        &self.providers
    }

    /// Workspace-relative `/`-separated path, or the absolute path for
    /// locations outside the workspace.
    pub fn identity_of(&self, path: &Path) -> String {
        let path = normalize(path);
        match path.strip_prefix(&self.root) {
            Ok(rel) => rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"),
            Err(_) => path.to_string_lossy().into_owned(),
        }
    }

    pub fn log(&self, stage: &str, detail: impl Into<String>) {
        self.events.lock().expect("event log").push(Event { stage: stage.to_string(), detail: detail.into() });
    }

    pub fn events(&self) -> Vec<Event> {
        self.events.lock().expect("event log").clone()
    }

    pub fn root_object(&self) -> ResourceObject {
        ResourceObject::new(ObjectKind::Workspace, String::new(), 0, Payload::Dir(self.root.clone()))
    }

    fn start_object(&self, scheme: Option<&str>) -> Result<ResourceObject, ResolveError> {
        match scheme {
            None => Ok(self.root_object()),
            Some("classpath") => {
                let roots =
                    if self.search_paths.is_empty() { vec![self.root.clone()] } else { self.search_paths.clone() };
                Ok(ResourceObject::new(ObjectKind::Workspace, "classpath:".into(), 0, Payload::SearchRoots(roots)))
            }
            Some("transient") => {
                Ok(ResourceObject::new(ObjectKind::Workspace, "transient:".into(), 0, Payload::Transients))
            }
            Some(alias) => match self.aliases.get(alias) {
                Some(dir) => {
                    Ok(ResourceObject::new(ObjectKind::Directory, self.identity_of(dir), 0, Payload::Dir(dir.clone())))
                }
                None => Err(ResolveError::UnknownScheme { scheme: alias.to_string() }),
            },
        }
    }

    /// One navigation step from `x`.
    pub fn step(&self, x: &ResourceObject, segment: &Segment) -> Result<Vec<ResourceObject>, ResolveError> {
        let mut accepted = false;
        let mut candidates = Vec::new();
        for provider in &self.providers {
            if !provider.accept(x) {
                continue;
            }
            accepted = true;
            let next = provider.next(self, x);
            if next.iter().any(|k| k == &segment.name) {
                let found = provider.navigate(self, x, &segment.name)?;
                return match segment.index {
                    None => Ok(found),
                    Some(k) => match found.into_iter().nth(k) {
                        Some(obj) => Ok(vec![obj]),
                        None => Err(ResolveError::SegmentNotFound {
                            segment: segment.to_string(),
                            identity: x.identity.clone(),
                            candidates: next,
                        }),
                    },
                };
            }
            candidates.extend(next);
        }
        if !accepted {
            return Err(ResolveError::NoProviderAccepts { identity: x.identity.clone() });
        }
        Err(ResolveError::SegmentNotFound { segment: segment.to_string(), identity: x.identity.clone(), candidates })
    }

    /// Resolve a URI to every object it denotes.
    pub fn resolve(&self, uri: &str) -> Result<Vec<ResourceObject>, ResolveError> {
        let parsed = parse_uri(uri)?;
        let mut current = vec![self.start_object(parsed.scheme.as_deref())?];
        for segment in &parsed.segments {
            let mut next = Vec::new();
            for x in &current {
                next.extend(self.step(x, segment)?);
            }
            current = next;
        }
        Ok(current)
    }

    /// Resolve a URI that must denote exactly one object.
    pub fn resolve_one(&self, uri: &str) -> Result<ResourceObject, ResolveError> {
        let mut found = self.resolve(uri)?;
        if found.len() == 1 {
            return Ok(found.remove(0));
        }
        let segment = parse_uri(uri)?.segments.last().map(|s| s.to_string()).unwrap_or_default();
        Err(ResolveError::AmbiguousSegment { segment, count: found.len() })
    }

    /// Children of `x` through the first accepting provider, in enumeration
    /// order. Same-name siblings get explicit indexes.
    pub fn children(&self, x: &ResourceObject) -> Vec<Child> {
        let Some(provider) = self.providers.iter().find(|p| p.accept(x)) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for key in provider.next(self, x) {
            let found = provider.navigate(self, x, &key).unwrap_or_default();
            let many = found.len() > 1;
            for (k, object) in found.into_iter().enumerate() {
                let segment = if many { Segment::indexed(&key, k) } else { Segment::named(&key) };
                out.push(Child { segment, object });
            }
        }
        out.sort_by_key(|c| c.object.ordinal);
        out
    }

    /// Run the configured command for transient `name` once per workspace and
    /// return the captured bytes as a transient object. Later calls return
    /// the cached result. Captures are serialized.
    pub fn capture_transient(&self, name: &str) -> Result<ResourceObject, TransientError> {
        let mut captures = self.captures.lock().expect("capture cache");
        if let Some(done) = captures.get(name) {
            return done.clone();
        }
        let result = self.run_capture(name);
        self.log("capture", format!("transient:{name} {}", if result.is_ok() { "ok" } else { "failed" }));
        captures.insert(name.to_string(), result.clone());
        result
    }

    fn run_capture(&self, name: &str) -> Result<ResourceObject, TransientError> {
        let spec = self.transients.get(name).ok_or_else(|| TransientError::CommandFailed {
            name: name.to_string(),
            code: None,
            message: "no command configured".to_string(),
        })?;
        let output = run_command(&spec.cmd, &self.root, None, spec.timeout()).map_err(|e| match e {
            ProcessError::Timeout { seconds, .. } => TransientError::Timeout { name: name.to_string(), seconds },
            other => TransientError::CommandFailed { name: name.to_string(), code: None, message: other.to_string() },
        })?;
        if !output.success() {
            return Err(TransientError::CommandFailed {
                name: name.to_string(),
                code: output.code,
                message: output.stderr_excerpt(),
            });
        }
        let bytes = match &spec.capture {
            Capture::Stdout => output.stdout,
            Capture::File(file) => std::fs::read(self.root.join(file))
                .map_err(|_| TransientError::CaptureFileMissing { name: name.to_string(), path: file.clone() })?,
        };
        Ok(ResourceObject::new(ObjectKind::Transient, format!("transient:{name}"), 0, Payload::Bytes(Arc::from(bytes))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn workspace() -> (tempfile::TempDir, Workspace) {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        fs::create_dir_all(root.join("fixtures/sub")).unwrap();
        fs::write(
            root.join("fixtures/company.xml"),
            "<company><department name=\"a\"><employee/></department><department name=\"b\"/></company>",
        )
        .unwrap();
        fs::write(root.join("fixtures/sub/x.txt"), "x").unwrap();
        let ws = Workspace::new(root);
        (dir, ws)
    }

    #[test]
    fn empty_uri_is_root() {
        let (_d, ws) = workspace();
        let found = ws.resolve("").unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].kind, ObjectKind::Workspace);
        assert_eq!(found[0].identity, "");
    }

    #[test]
    fn file_and_fragment() {
        let (_d, ws) = workspace();
        let file = ws.resolve_one("fixtures/company.xml").unwrap();
        assert_eq!(file.kind, ObjectKind::XmlDocument);
        let dep = ws.resolve_one("fixtures/company.xml/company/department#0").unwrap();
        assert_eq!(dep.kind, ObjectKind::XmlElement);
        assert_eq!(dep.element().unwrap().attribute("name"), Some("a"));
        assert_eq!(dep.identity, "fixtures/company.xml/company#0/department#0");
    }

    #[test]
    fn unindexed_segment_yields_set() {
        let (_d, ws) = workspace();
        assert_eq!(ws.resolve("fixtures/company.xml/company/department").unwrap().len(), 2);
        assert!(matches!(
            ws.resolve_one("fixtures/company.xml/company/department"),
            Err(ResolveError::AmbiguousSegment { count: 2, .. })
        ));
    }

    #[test]
    fn missing_segment() {
        let (_d, ws) = workspace();
        match ws.resolve("fixtures/nope.xml").unwrap_err() {
            ResolveError::SegmentNotFound { candidates, .. } => assert_eq!(candidates, ["company.xml", "sub"]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(ws.resolve("fixtures/sub/x.txt/y"), Err(ResolveError::NoProviderAccepts { .. })));
        assert!(matches!(ws.resolve("nope:a"), Err(ResolveError::UnknownScheme { .. })));
        assert!(matches!(
            ws.resolve("fixtures/company.xml/company/department#2"),
            Err(ResolveError::SegmentNotFound { .. })
        ));
    }

    #[test]
    fn alias_root() {
        let (dir, _) = workspace();
        let cfg = Config::from_json(r#"{"aliases": {"fx": "fixtures"}}"#).unwrap();
        let ws = Workspace::from_config(dir.path(), &cfg);
        let obj = ws.resolve_one("fx:/sub/x.txt").unwrap();
        assert_eq!(obj.identity, "fixtures/sub/x.txt");
    }

    #[test]
    fn children_index_same_name_siblings() {
        let (_d, ws) = workspace();
        let company = ws.resolve_one("fixtures/company.xml/company").unwrap();
        let segs: Vec<String> = ws.children(&company).iter().map(|c| c.segment.to_string()).collect();
        assert_eq!(segs, ["department#0", "department#1"]);
    }

    #[test]
    fn transient_captured_once() {
        let (dir, _) = workspace();
        let cfg = Config::from_json(
            r#"{"transients": {"copyXml": {"cmd": ["cat", "fixtures/company.xml"], "capture": "stdout"}}}"#,
        )
        .unwrap();
        let ws = Workspace::from_config(dir.path(), &cfg);
        let a = ws.resolve_one("transient:copyXml").unwrap();
        let b = ws.resolve_one("transient:copyXml").unwrap();
        assert_eq!(a, b);
        assert_eq!(&a.bytes().unwrap()[..], &fs::read(dir.path().join("fixtures/company.xml")).unwrap()[..]);
        assert_eq!(ws.events().iter().filter(|e| e.stage == "capture").count(), 1);
        let emp = ws.resolve_one("transient:copyXml/company/department#0/employee").unwrap();
        assert_eq!(emp.kind, ObjectKind::XmlElement);
    }

    #[test]
    fn transient_failures() {
        let (dir, _) = workspace();
        let cfg = Config::from_json(
            r#"{"transients": {
                "bad": {"cmd": ["sh", "-c", "exit 2"]},
                "nofile": {"cmd": ["true"], "capture": {"file": "out.xml"}}
            }}"#,
        )
        .unwrap();
        let ws = Workspace::from_config(dir.path(), &cfg);
        assert!(matches!(ws.capture_transient("bad"), Err(TransientError::CommandFailed { code: Some(2), .. })));
        assert!(matches!(ws.capture_transient("nofile"), Err(TransientError::CaptureFileMissing { .. })));
        assert!(matches!(ws.capture_transient("absent"), Err(TransientError::CommandFailed { code: None, .. })));
    }
}
