//! Independent oracles and generators shared by the property tests and the
//! acceptance harness.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{Cursor, Read, Write};

use proptest::prelude::*;
use quick_xml::events::Event as XmlEvent;

use proptest::test_runner::TestCaseError;

use megal_core::diagnostics::Diagnostic;
use megal_core::inference::{
    run_inference, select_inferrers, EngineConfig, InferenceOutcome, Inferrer, BUILTIN_INFERRERS,
};
use megal_core::linker::{link, load_graph, MapLoader, ModuleLoader};
use megal_core::model::Megamodel;
use megal_core::resolver::{resolve_all_bindings, ResourceObject, Workspace};

#[derive(Debug, Clone)]
pub struct Lattice {
    pub languages: usize,
    pub artifacts: usize,
    pub subset: BTreeSet<(usize, usize)>,
    pub element_of: BTreeSet<(usize, usize)>,
}

pub fn lattice() -> impl Strategy<Value = Lattice> {
    (1usize..=8, 0usize..4).prop_flat_map(|(languages, artifacts)| {
        (
            prop::collection::btree_set((0..languages, 0..languages), 0..=languages * 2),
            prop::collection::btree_set((0..artifacts.max(1), 0..languages), 0..=artifacts * 2),
        )
            .prop_map(move |(subset, element_of)| Lattice {
                languages,
                artifacts,
                subset,
                element_of: if artifacts == 0 { BTreeSet::new() } else { element_of },
            })
    })
}

impl Lattice {
    pub fn model(&self) -> Megamodel {
        let mut text = String::from("module M\n");
        for l in 0..self.languages {
            text += &format!("L{l} : Language\n");
        }
        for a in 0..self.artifacts {
            text += &format!("a{a} : Artifact\n");
        }
        for (x, y) in &self.subset {
            text += &format!("L{x} subsetOf L{y}\n");
        }
        for (a, l) in &self.element_of {
            text += &format!("a{a} elementOf L{l}\n");
        }
        let loader = MapLoader::new().with("M", &text);
        let out = link(&load_graph(loader.load("M").unwrap().unwrap(), &loader).unwrap());
        assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
        out.model
    }

    /// Pairs connected by a path of one or more `subsetOf` edges.
    pub fn closure(&self) -> BTreeSet<(usize, usize)> {
        let n = self.languages;
        let mut reach = vec![vec![false; n]; n];
        for &(x, y) in &self.subset {
            reach[x][y] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| reach[i][j]).collect()
    }

    /// Memberships obtained by enumerating paths from each direct language.
    pub fn memberships(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for &(a, l) in &self.element_of {
            let mut stack = vec![l];
            let mut seen = BTreeSet::new();
            while let Some(x) = stack.pop() {
                if seen.insert(x) {
                    out.insert((a, x));
                    stack.extend(self.subset.iter().filter(|(s, _)| *s == x).map(|(_, t)| *t));
                }
            }
        }
        out
    }
}

pub fn infer(model: &mut Megamodel, inferrers: &[Box<dyn Inferrer>]) -> InferenceOutcome {
    let dir = tempfile::tempdir().unwrap();
    let ws = Workspace::new(dir.path());
    let (mut table, _) = resolve_all_bindings(model, &ws);
    run_inference(model, &mut table, &ws, &BTreeMap::new(), inferrers, EngineConfig::default())
}

pub fn pairs(model: &Megamodel, predicate: &str, left: char, right: char) -> BTreeSet<(usize, usize)> {
    let index = |name: &str, prefix: char| name.strip_prefix(prefix).and_then(|n| n.parse().ok());
    model
        .relationships_with(predicate)
        .filter_map(|r| Some((index(&r.subject, left)?, index(&r.object, right)?)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SmallModule {
    pub artifacts: usize,
    pub languages: usize,
    pub element_of: Vec<(usize, usize)>,
    pub conforms: Vec<(usize, usize)>,
    pub subset: Vec<(usize, usize)>,
    pub bound: Vec<bool>,
}

pub fn small_module() -> impl Strategy<Value = SmallModule> {
    (1usize..5, 1usize..4).prop_flat_map(|(artifacts, languages)| {
        (
            prop::collection::vec((0..artifacts, 0..languages), 0..6),
            prop::collection::vec((0..artifacts, 0..artifacts), 0..4),
            prop::collection::vec((0..languages, 0..languages), 0..4),
            prop::collection::vec(any::<bool>(), artifacts),
        )
            .prop_map(move |(element_of, conforms, subset, bound)| SmallModule {
                artifacts,
                languages,
                element_of,
                conforms,
                subset,
                bound,
            })
    })
}

impl SmallModule {
    pub fn text(&self, name: &str) -> String {
        let mut out = format!("module {name}\n");
        for a in 0..self.artifacts {
            out += &format!("a{a} : Artifact\n");
        }
        for l in 0..self.languages {
            out += &format!("L{l} : Language\n");
        }
        for (a, l) in &self.element_of {
            out += &format!("a{a} elementOf L{l}\n");
        }
        for (a, b) in &self.conforms {
            out += &format!("a{a} conformsTo a{b}\n");
        }
        for (l, m) in &self.subset {
            out += &format!("L{l} subsetOf L{m}\n");
        }
        for (a, bound) in self.bound.iter().enumerate() {
            if *bound {
                out += &format!("a{a} = \"m/a{a}.xml\"\n");
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Tree {
    pub tag: String,
    pub children: Vec<Tree>,
}

pub fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop::sample::select(vec!["a", "b", "c"]).prop_map(|t| Tree { tag: t.to_string(), children: vec![] });
    leaf.prop_recursive(3, 24, 4, |inner| {
        (prop::sample::select(vec!["a", "b", "c"]), prop::collection::vec(inner, 0..4))
            .prop_map(|(t, children)| Tree { tag: t.to_string(), children })
    })
}

fn serialize(tree: &Tree, next_id: &mut usize, out: &mut String) {
    let id = *next_id;
    *next_id += 1;
    if tree.children.is_empty() {
        out.push_str(&format!("<{} id=\"{id}\"/>", tree.tag));
    } else {
        out.push_str(&format!("<{} id=\"{id}\">", tree.tag));
        for child in &tree.children {
            serialize(child, next_id, out);
        }
        out.push_str(&format!("</{}>", tree.tag));
    }
}

pub fn document(children: &[Tree]) -> String {
    let root = Tree { tag: "r".into(), children: children.to_vec() };
    let mut out = String::from("<?xml version=\"1.0\"?>\n");
    serialize(&root, &mut 0, &mut out);
    out
}

/// Element tree read back through an independent XML parser.
#[derive(Debug)]
pub struct Node {
    pub tag: String,
    pub id: String,
    pub children: Vec<Node>,
}

pub fn oracle_parse(text: &str) -> Node {
    let mut reader = quick_xml::Reader::from_str(text);
    let mut stack: Vec<Node> = vec![Node { tag: String::new(), id: String::new(), children: vec![] }];
    loop {
        match reader.read_event().unwrap() {
            XmlEvent::Start(e) => {
                let node = open(&e);
                stack.push(node);
            }
            XmlEvent::Empty(e) => {
                let node = open(&e);
                stack.last_mut().unwrap().children.push(node);
            }
            XmlEvent::End(_) => {
                let node = stack.pop().unwrap();
                stack.last_mut().unwrap().children.push(node);
            }
            XmlEvent::Eof => break,
            _ => {}
        }
    }
    stack.pop().unwrap().children.remove(0)
}

fn open(e: &quick_xml::events::BytesStart<'_>) -> Node {
    let id = e
        .attributes()
        .map(Result::unwrap)
        .find(|a| a.key.as_ref() == b"id")
        .map(|a| a.unescape_value().unwrap().into_owned())
        .unwrap_or_default();
    Node { tag: String::from_utf8(e.name().as_ref().to_vec()).unwrap(), id, children: vec![] }
}

pub fn oracle_unzip(bytes: &[u8], entry: &str) -> String {
    let mut archive = zip::ZipArchive::new(Cursor::new(bytes)).unwrap();
    let mut text = String::new();
    archive.by_name(entry).unwrap().read_to_string(&mut text).unwrap();
    text
}

pub fn write_zip(path: &std::path::Path, entries: &[(String, String)]) {
    let mut zip = zip::ZipWriter::new(fs::File::create(path).unwrap());
    let options = zip::write::SimpleFileOptions::default();
    for (name, text) in entries {
        zip.start_file(name.as_str(), options).unwrap();
        zip.write_all(text.as_bytes()).unwrap();
    }
    zip.finish().unwrap();
}

/// Joins schema declarations and Java classes on case-insensitive names.
pub fn name_join_oracle() -> BTreeSet<(String, String)> {
    let ws = super::fixtures().join("workspaces/databinding");
    let xsd = fs::read_to_string(ws.join("xsd/company.xsd")).unwrap();
    let mut reader = quick_xml::Reader::from_str(&xsd);
    let mut depth = 0;
    let mut declarations: Vec<(String, String)> = Vec::new();
    loop {
        match reader.read_event().unwrap() {
            XmlEvent::Start(_) => depth += 1,
            XmlEvent::End(_) => depth -= 1,
            XmlEvent::Empty(e) if depth == 1 => {
                let tag = String::from_utf8(e.name().as_ref().to_vec()).unwrap();
                let name = e
                    .attributes()
                    .map(Result::unwrap)
                    .find(|a| a.key.as_ref() == b"name")
                    .map(|a| a.unescape_value().unwrap().into_owned())
                    .unwrap();
                declarations.push((tag, name));
            }
            XmlEvent::Eof => break,
            _ => {}
        }
    }
    let classes: Vec<String> = fs::read_dir(ws.join("org/softlang/company/xjc"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    let mut out = BTreeSet::new();
    for (tag, name) in &declarations {
        let same: Vec<&String> = declarations.iter().filter(|(t, _)| t == tag).map(|(_, n)| n).collect();
        let segment = if same.len() == 1 {
            tag.clone()
        } else {
            format!("{tag}#{}", same.iter().position(|n| *n == name).unwrap())
        };
        for class in &classes {
            if class.trim_end_matches(".java").eq_ignore_ascii_case(name) {
                out.insert((
                    format!("xsd/company.xsd/xs:schema/{segment}"),
                    format!("org/softlang/company/xjc/{class}"),
                ));
            }
        }
    }
    out
}

/// Closure and lifting match the brute-force oracles, the run is monotone and
/// settles within `n²` rounds for `n` languages.
pub fn check_inference(l: &Lattice) -> Result<(), TestCaseError> {
    let mut model = l.model();
    let before = model.elements();
    let outcome = infer(&mut model, &select_inferrers(None).unwrap());
    prop_assert!(outcome.reached_fixed_point);
    prop_assert!(outcome.stats.rounds <= l.languages * l.languages);
    prop_assert_eq!(pairs(&model, "subsetOf", 'L', 'L'), l.closure());
    prop_assert_eq!(pairs(&model, "elementOf", 'a', 'L'), l.memberships());
    for element in &before {
        prop_assert!(model.contains(element));
    }
    Ok(())
}

/// A permutation of the built-in inferrers.
pub fn inferrer_order() -> impl Strategy<Value = Vec<usize>> {
    Just((0..BUILTIN_INFERRERS.len()).collect::<Vec<_>>()).prop_shuffle()
}

pub fn check_inferrer_order(l: &Lattice, order: &[usize]) -> Result<(), TestCaseError> {
    let mut reference = l.model();
    infer(&mut reference, &select_inferrers(None).unwrap());
    let names: Vec<String> = order.iter().map(|&i| BUILTIN_INFERRERS[i].to_string()).collect();
    let mut shuffled = l.model();
    infer(&mut shuffled, &select_inferrers(Some(&names)).unwrap());
    prop_assert_eq!(reference.to_canonical_json(true), shuffled.to_canonical_json(true));
    Ok(())
}

fn link_with(loader: &MapLoader, root: &str) -> (Megamodel, Vec<Diagnostic>) {
    let out = link(&load_graph(loader.load(root).unwrap().unwrap(), loader).unwrap());
    (out.model, out.diagnostics)
}

/// `import (M, M)` links to the same model as `import (M)`.
pub fn check_import_idempotence(m: &SmallModule) -> Result<(), TestCaseError> {
    let once = MapLoader::new().with("M", &m.text("M")).with("Root", "module Root import (M)\n");
    let twice = MapLoader::new().with("M", &m.text("M")).with("Root", "module Root import (M, M)\n");
    let (a, da) = link_with(&once, "Root");
    let (b, db) = link_with(&twice, "Root");
    prop_assert!(da.is_empty() && db.is_empty());
    prop_assert_eq!(a.to_canonical_json(true), b.to_canonical_json(true));
    Ok(())
}

pub fn archive_documents() -> impl Strategy<Value = Vec<Vec<Tree>>> {
    prop::collection::vec(prop::collection::vec(tree(), 0..5), 1..4)
}

pub fn navigation_steps() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..3, 0usize..4), 0..4)
}

fn id_of(object: &ResourceObject) -> String {
    object.element().and_then(|e| e.attribute("id")).unwrap_or_default().to_string()
}

/// Writes the documents into `data/bundle.zip` and follows `steps` through
/// each of them, comparing every step with the independently parsed tree.
/// Returns the workspace for further checks.
pub fn check_cascade(
    docs: &[Vec<Tree>],
    steps: &[(usize, usize)],
) -> Result<(tempfile::TempDir, Workspace), TestCaseError> {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("data")).unwrap();
    let entries: Vec<(String, String)> =
        docs.iter().enumerate().map(|(i, d)| (format!("docs/doc{i}.xml"), document(d))).collect();
    let zip_path = dir.path().join("data/bundle.zip");
    write_zip(&zip_path, &entries);
    let zip_bytes = fs::read(&zip_path).unwrap();
    let ws = Workspace::new(dir.path());

    for (entry, _) in &entries {
        let node = oracle_parse(&oracle_unzip(&zip_bytes, entry));
        let mut uri = format!("data/bundle.zip/{entry}/r");
        let mut current: &Node = &node;
        for &(tag, k) in steps {
            let tag = ["a", "b", "c"][tag];
            let same: Vec<&Node> = current.children.iter().filter(|c| c.tag == tag).collect();
            if same.is_empty() {
                break;
            }
            let all = ws.resolve(&format!("{uri}/{tag}")).unwrap();
            prop_assert_eq!(
                all.iter().map(id_of).collect::<Vec<_>>(),
                same.iter().map(|n| n.id.clone()).collect::<Vec<_>>()
            );
            for (k, expected) in same.iter().enumerate() {
                prop_assert_eq!(id_of(&ws.resolve_one(&format!("{uri}/{tag}#{k}")).unwrap()), expected.id.clone());
            }
            let k = k % same.len();
            uri = format!("{uri}/{tag}#{k}");
            current = same[k];
        }
        let found = ws.resolve_one(&uri).unwrap();
        prop_assert_eq!(id_of(&found), current.id.clone());
        prop_assert_eq!(ws.resolve_one(&uri).unwrap().identity, found.identity.clone());
        let bogus = format!("{uri}/zzz");
        prop_assert!(ws.resolve(&bogus).is_err());
    }
    Ok((dir, ws))
}
