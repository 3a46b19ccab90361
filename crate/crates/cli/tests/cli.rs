#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn megal(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_megal")).args(args).current_dir(cwd).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Every module of every fixture workspace under `root`.
fn workspace_modules(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for ws in fs::read_dir(root.join("workspaces")).unwrap() {
        for entry in fs::read_dir(ws.unwrap().path()).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "megal") {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

fn module(root: &Path, workspace: &str, name: &str) -> String {
    root.join("workspaces").join(workspace).join(format!("{name}.megal")).to_string_lossy().into_owned()
}

#[test]
fn check_exit_codes() {
    let scratch = common::scratch_fixtures();
    let root = scratch.path();
    let cwd = root;
    assert_eq!(code(&megal(&["check", &module(root, "xml", "XMLCheck")], cwd)), 0);
    let bad = megal(&["check", &module(root, "xml", "XMLMalformed")], cwd);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("error E301"));
    assert_eq!(code(&megal(&["graph", &module(root, "xml", "XMLMalformed")], cwd)), 0);

    let corpus = root.join("corpus/EMFModelAPI.megal");
    let corpus = corpus.to_str().unwrap();
    assert_eq!(code(&megal(&["check", corpus], cwd)), 0);
    assert_eq!(code(&megal(&["check", "--strict", corpus], cwd)), 1);

    assert_eq!(code(&megal(&["check", "nowhere.megal"], cwd)), 2);
    assert_eq!(code(&megal(&["graph", "--format", "svg", corpus], cwd)), 2);
    assert_eq!(code(&megal(&["check", "--bogus", corpus], cwd)), 2);
}

#[test]
fn missing_import_reports_e020() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("A.megal"), "module A import (Nope)\n").unwrap();
    let out = megal(&["check", "A.megal"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("error E020"), "{}", stdout(&out));
    assert_eq!(code(&megal(&["explore", "A.megal"], dir.path())), 1);
}

#[test]
fn check_json_summary_partitions_statements() {
    let root = common::fixtures();
    let out = megal(&["check", "--format", "json", &module(&root, "xml", "XMLNonConforming")], &root);
    assert_eq!(code(&out), 1);
    let value: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let summary = &value["summary"];
    let sum: u64 =
        ["satisfied", "violated", "notEvaluated", "unresolved"].iter().map(|k| summary[k].as_u64().unwrap()).sum();
    assert_eq!(sum, summary["total"].as_u64().unwrap());
    assert_eq!(value["statements"].as_array().unwrap().len() as u64, sum);
    assert!(value["diagnostics"].as_array().unwrap().iter().any(|d| d["code"] == "E301"));
}

#[test]
fn trace_command() {
    let root = common::fixtures();
    let databinding = module(&root, "databinding", "DataBinding");
    let out = megal(&["trace", &databinding], &root);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), fs::read_to_string(root.join("golden/databinding.trace")).unwrap());
    let selected = megal(&["trace", "--select", "xsdFiles/javaFiles", &databinding], &root);
    assert_eq!(stdout(&selected), stdout(&out));

    let missing = megal(&["trace", "--select", "nope/nothing", &databinding], &root);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("megal: no such statement"));
    assert_eq!(code(&megal(&["trace", "--select", "no-slash", &databinding], &root)), 2);
}

#[test]
fn outputs_are_deterministic_and_sorted() {
    let scratch = common::scratch_fixtures();
    let root = scratch.path();
    for path in workspace_modules(root) {
        let path = path.to_str().unwrap();
        for args in [
            vec!["check", path],
            vec!["check", "--format", "json", path],
            vec!["graph", "--format", "json", path],
            vec!["graph", path],
            vec!["explore", path],
        ] {
            let first = megal(&args, root);
            let second = megal(&args, root);
            assert_eq!(first.stdout, second.stdout, "{args:?}");
            assert_eq!(code(&first), code(&second));
            if args.contains(&"json") || args[0] == "explore" {
                let text = stdout(&first);
                let value: Value = serde_json::from_str(&text).unwrap();
                assert_eq!(value.to_string(), text.trim_end(), "keys are sorted: {args:?}");
            }
        }
    }
}

#[test]
fn explore_and_graph_agree_on_traces() {
    let root = common::fixtures();
    for (ws, name) in [("databinding", "DataBinding"), ("nested", "Nested")] {
        let path = module(&root, ws, name);
        let explore: Value = serde_json::from_str(&stdout(&megal(&["explore", &path], &root))).unwrap();
        let graph: Value = serde_json::from_str(&stdout(&megal(&["graph", "--format", "json", &path], &root))).unwrap();
        assert_eq!(explore["traces"], graph["traces"]);
        let trace_rows = explore["statements"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|s| s["origin"].to_string().contains("trace"))
            .collect::<Vec<_>>();
        assert!(trace_rows.iter().all(|s| s["status"].is_null()));
        assert_eq!(trace_rows.len(), explore["traces"][0]["links"].as_array().unwrap().len());
    }
}

#[test]
fn verbose_event_log_orders_capture_before_evaluation() {
    let scratch = common::scratch_fixtures();
    let root = scratch.path();
    let out = megal(&["check", "--verbose", &module(root, "transient", "TransientCheck")], root);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let events: Vec<String> = stderr(&out).lines().filter(|l| l.starts_with("event ")).map(str::to_string).collect();
    let position = |prefix: &str| {
        events.iter().position(|e| e.starts_with(prefix)).unwrap_or_else(|| panic!("{prefix}: {events:?}"))
    };
    assert_eq!(events.iter().filter(|e| e.starts_with("event capture:")).count(), 1);
    assert!(position("event check:") < position("event capture:"));
    assert!(position("event capture:") < position("event inference:"));
    assert!(position("event inference:") < position("event evaluate:"));
    assert!(position("event evaluate:") < position("event trace:"));
    let log = fs::read_to_string(root.join("workspaces/transient/captures.log")).unwrap();
    assert_eq!(log.lines().count(), 1);
}

#[test]
fn emit_model_writes_canonical_json() {
    let root = common::fixtures();
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("model.json");
    let out = megal(&["graph", "--emit-model", target.to_str().unwrap(), &module(&root, "xml", "XMLCheck")], &root);
    assert_eq!(code(&out), 0);
    let value: Value = serde_json::from_str(&fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(value["name"], "XMLCheck");
}
