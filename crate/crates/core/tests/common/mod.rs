#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use megal_core::config::{Config, CONFIG_FILE_NAME};
use megal_core::linker::{link, load_graph, FsLoader, LinkOutput};
use megal_core::pipeline::{run_pipeline, PipelineOptions, PipelineRun};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).parent().unwrap().join("core/fixtures")
}

pub fn corpus_dir() -> PathBuf {
    fixtures().join("corpus")
}

pub const CORPUS: [&str; 5] = ["XML", "EMF", "ATL", "Xtext", "EMFModelAPI"];

pub fn link_corpus(name: &str) -> LinkOutput {
    let loader = FsLoader::new(vec![corpus_dir()], Some(corpus_dir()));
    let root = loader.load_file(&corpus_dir().join(format!("{name}.megal"))).expect("corpus module parses");
    link(&load_graph(root, &loader).expect("corpus graph loads"))
}

/// Every `.megal` file under the fixtures directory.
pub fn fixture_modules() -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![fixtures()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "megal") {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

pub mod oracles;

pub fn copy_tree(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.path().is_dir() {
            copy_tree(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

/// A scratch copy of the whole fixtures tree, so workspaces can be mutated.
pub fn scratch_fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&fixtures(), dir.path());
    dir
}

/// Run the pipeline on `<fixtures>/workspaces/<workspace>/<module>.megal`
/// under `fixtures_root`.
pub fn run_workspace_at(fixtures_root: &Path, workspace: &str, module: &str) -> PipelineRun {
    let root = fixtures_root.join("workspaces").join(workspace);
    let config_path = root.join(CONFIG_FILE_NAME);
    let config = if config_path.is_file() { Config::load(&config_path).unwrap() } else { Config::default() };
    let options = PipelineOptions::new(&root, config, Vec::new()).unwrap();
    run_pipeline(&root.join(format!("{module}.megal")), &options)
}

pub fn run_workspace(workspace: &str, module: &str) -> PipelineRun {
    run_workspace_at(&fixtures(), workspace, module)
}
