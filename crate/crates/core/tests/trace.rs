mod common;

use std::collections::BTreeSet;
use std::fs;

use serde_json::json;

use common::oracles::name_join_oracle;
use megal_core::config::Config;
use megal_core::evaluation::parts_of;
use megal_core::model::Megamodel;
use megal_core::pipeline::{run_pipeline, PipelineOptions, PipelineRun};
use megal_core::trace::{
    derive_traces, export_graph, format_trace_table, render_trace_table, ExportFormat, TRACE_RULE,
};

fn uri(run: &PipelineRun, entity: &str) -> String {
    run.model.bindings_of(entity).next().map(|b| b.uri.clone()).unwrap_or_else(|| entity.to_string())
}

fn links_as_uris(run: &PipelineRun) -> BTreeSet<(String, String)> {
    run.traces.iter().flat_map(|t| &t.links).map(|l| (uri(run, &l.left), uri(run, &l.right))).collect()
}

#[test]
fn databinding_links_match_a_name_join() {
    let run = common::run_workspace("databinding", "DataBinding");
    assert!(!run.has_errors(), "{:?}", run.diagnostics);
    assert_eq!(run.traces.len(), 1);
    let oracle = name_join_oracle();
    assert_eq!(oracle.len(), 3);
    assert_eq!(links_as_uris(&run), oracle);
    let json = run.traces[0].to_json();
    assert_eq!(json["links"].as_array().unwrap().len(), 3);
    assert_eq!(json["owner"], json!({"subject": "xsdFiles", "predicate": "correspondsTo", "object": "javaFiles"}));
}

#[test]
fn trace_tables_match_golden_files() {
    for (workspace, module, golden) in
        [("databinding", "DataBinding", "databinding.trace"), ("nested", "Nested", "nested.trace")]
    {
        let run = common::run_workspace(workspace, module);
        let rows = render_trace_table(&run.model, &run.bindings, &run.traces[0]);
        let expected = fs::read_to_string(common::fixtures().join("golden").join(golden)).unwrap();
        assert_eq!(format_trace_table(&rows), expected, "{workspace}");
    }
}

#[test]
fn nested_table_indents_by_depth() {
    let run = common::run_workspace("nested", "Nested");
    let rows = render_trace_table(&run.model, &run.bindings, &run.traces[0]);
    let depths: Vec<usize> = rows.iter().map(|r| r.depth).collect();
    assert_eq!(depths, [0, 1, 2, 2, 1, 2]);
}

#[test]
fn part_free_correspondence_renders_one_row() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.txt"), "a").unwrap();
    fs::write(dir.path().join("b.txt"), "b").unwrap();
    let file = dir.path().join("Flat.megal");
    fs::write(&file, "module Flat\na : Artifact\nb : Artifact\na = \"a.txt\"\nb = \"b.txt\"\na correspondsTo b\n")
        .unwrap();
    let run = run_pipeline(&file, &PipelineOptions::new(dir.path(), Config::default(), Vec::new()).unwrap());
    assert_eq!(run.traces.len(), 1);
    assert!(run.traces[0].links.is_empty());
    let rows = render_trace_table(&run.model, &run.bindings, &run.traces[0]);
    assert_eq!(format_trace_table(&rows), "a.txt\tb.txt\n");
}

#[test]
fn links_are_bipartite_and_publication_is_monotone() {
    for (workspace, module) in [("databinding", "DataBinding"), ("nested", "Nested")] {
        let run = common::run_workspace(workspace, module);
        for graph in &run.traces {
            let left: BTreeSet<String> = parts_of(&run.model, &run.bindings, &graph.subject).into_iter().collect();
            let right: BTreeSet<String> = parts_of(&run.model, &run.bindings, &graph.object).into_iter().collect();
            for link in &graph.links {
                assert!(left.contains(&link.left) && right.contains(&link.right), "{link:?}");
                let published = run
                    .model
                    .relationships()
                    .iter()
                    .find(|r| r.subject == link.left && r.object == link.right && r.predicate == "correspondsTo")
                    .unwrap();
                assert!(published.origin.is_inferred_by(TRACE_RULE));
            }
        }

        let mut model = run.model.clone();
        let before = model.elements();
        let again = derive_traces(&mut model, &run.bindings, Some(&run.report));
        assert_eq!(again, run.traces);
        assert_eq!(model.elements(), before);
    }
}

#[test]
fn graph_exports() {
    let out = common::link_corpus("XML");
    let dot = export_graph(&out.model, &[], ExportFormat::Dot, false);
    assert!(dot.starts_with("digraph megamodel {"));
    assert!(dot.contains("  xmlFile -> xsdFiles [label=\"conformsTo\"];"), "{dot}");

    let empty = export_graph(&Megamodel::new("Empty"), &[], ExportFormat::Json, false);
    let value: serde_json::Value = serde_json::from_str(&empty).unwrap();
    assert_eq!(value, json!({"entities": [], "statements": [], "traces": []}));

    let run = common::run_workspace("databinding", "DataBinding");
    let value: serde_json::Value =
        serde_json::from_str(&export_graph(&run.model, &run.traces, ExportFormat::Json, false)).unwrap();
    assert_eq!(value["traces"][0]["links"].as_array().unwrap().len(), 3);
    let dot = export_graph(&run.model, &run.traces, ExportFormat::Dot, false);
    assert_eq!(dot.matches("style=dashed").count(), 3);
    assert!("svg".parse::<ExportFormat>().is_err());
}
