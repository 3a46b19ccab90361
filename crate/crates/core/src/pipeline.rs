//! The fixed stage order: link, check, capture, resolve, infer, evaluate,
//! trace. Stages after `check` only run on a model without errors. Every
//! stage records events in the workspace log.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::checker::check_well_formed;
use crate::config::{Config, ConfigError};
use crate::diagnostics::{has_errors, Diagnostic};
use crate::evaluation::{build_registry, verify, VerificationReport};
use crate::inference::{run_inference, select_inferrers, EngineConfig, InferenceStats, Inferrer, UnknownInferrer};
use crate::linker::{link, load_graph, FsLoader, ModuleGraph, ModuleLoader};
use crate::model::Megamodel;
use crate::resolver::{resolve_all_bindings, BindingTable, Workspace};
use crate::syntax::RawModule;
use crate::trace::{derive_traces, TraceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Link,
    Check,
    Capture,
    Resolve,
    Infer,
    Evaluate,
    Trace,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Link => "link",
            Stage::Check => "check",
            Stage::Capture => "capture",
            Stage::Resolve => "resolve",
            Stage::Infer => "inference",
            Stage::Evaluate => "evaluate",
            Stage::Trace => "trace",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    UnknownInferrer(#[from] UnknownInferrer),
}

pub struct PipelineOptions {
    pub workspace_root: PathBuf,
    pub config: Config,
    /// Searched for imported modules after the root module's directory and
    /// the config's `modulePaths`.
    pub module_paths: Vec<PathBuf>,
    pub knowledge_map: BTreeMap<String, String>,
    pub inferrers: Vec<Box<dyn Inferrer>>,
}

impl PipelineOptions {
    /// Options from a config, loading its knowledge map and selecting its
    /// inferrers.
    pub fn new(
        workspace_root: &Path,
        config: Config,
        module_paths: Vec<PathBuf>,
    ) -> Result<PipelineOptions, PipelineError> {
        let knowledge_map = config.load_knowledge_map(workspace_root)?;
        let inferrers = select_inferrers(config.inferrers.as_deref())?;
        Ok(PipelineOptions {
            workspace_root: workspace_root.to_path_buf(),
            config,
            module_paths,
            knowledge_map,
            inferrers,
        })
    }
}

pub struct PipelineRun {
    pub graph: Option<ModuleGraph>,
    pub model: Megamodel,
    pub workspace: Workspace,
    pub bindings: BindingTable,
    pub diagnostics: Vec<Diagnostic>,
    pub inference: Option<InferenceStats>,
    pub report: VerificationReport,
    pub traces: Vec<TraceGraph>,
    /// Last stage that ran to completion.
    pub completed: Option<Stage>,
}

impl PipelineRun {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }
}

/// Run the pipeline on a module file. Imports are searched in the file's
/// directory first.
pub fn run_pipeline(root_file: &Path, options: &PipelineOptions) -> PipelineRun {
    let root_dir = root_file.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut search = vec![root_dir];
    search.extend(options.config.module_paths.iter().map(|p| options.workspace_root.join(p)));
    search.extend(options.module_paths.iter().cloned());
    let loader = FsLoader::new(search, Some(options.workspace_root.clone()));
    match loader.load_file(root_file) {
        Ok(raw) => run_module(raw, &loader, options),
        Err(err) => failed_run(options, err.to_diagnostics()),
    }
}

fn failed_run(options: &PipelineOptions, diagnostics: Vec<Diagnostic>) -> PipelineRun {
    PipelineRun {
        graph: None,
        model: Megamodel::new(""),
        workspace: Workspace::from_config(&options.workspace_root, &options.config),
        bindings: BindingTable::default(),
        diagnostics,
        inference: None,
        report: VerificationReport::default(),
        traces: Vec::new(),
        completed: None,
    }
}

/// Run the pipeline on an already parsed root module.
pub fn run_module(root: RawModule, loader: &dyn ModuleLoader, options: &PipelineOptions) -> PipelineRun {
    let graph = match load_graph(root, loader) {
        Ok(graph) => graph,
        Err(err) => return failed_run(options, err.to_diagnostics()),
    };
    let linked = link(&graph);
    let mut run = failed_run(options, linked.diagnostics);
    run.model = linked.model;
    run.graph = Some(graph);
    let ws = &run.workspace;
    ws.log("link", format!("{} statements", run.model.statement_count()));
    run.completed = Some(Stage::Link);

    run.diagnostics.extend(check_well_formed(&run.model));
    ws.log("check", format!("{} diagnostics", run.diagnostics.len()));
    run.completed = Some(Stage::Check);
    if run.has_errors() {
        return run;
    }

    for name in options.config.transients.keys() {
        let _ = ws.capture_transient(name);
    }
    run.completed = Some(Stage::Capture);

    let (mut bindings, diagnostics) = resolve_all_bindings(&run.model, ws);
    run.diagnostics.extend(diagnostics);
    run.completed = Some(Stage::Resolve);

    let engine = EngineConfig { max_rounds: options.config.max_rounds(), part_depth: options.config.part_depth() };
    let outcome = run_inference(&mut run.model, &mut bindings, ws, &options.knowledge_map, &options.inferrers, engine);
    run.diagnostics.extend(outcome.diagnostics);
    run.inference = Some(outcome.stats);
    run.completed = Some(Stage::Infer);

    let (registry, diagnostics) = build_registry(&run.model, &options.config.plugins);
    run.diagnostics.extend(diagnostics);
    let (report, diagnostics) = verify(&run.model, &bindings, ws, &registry);
    run.diagnostics.extend(diagnostics);
    run.completed = Some(Stage::Evaluate);

    run.traces = derive_traces(&mut run.model, &bindings, Some(&report));
    let links: usize = run.traces.iter().map(|t| t.links.len()).sum();
    ws.log("trace", format!("{} traces, {links} links", run.traces.len()));
    run.report = report;
    run.bindings = bindings;
    run.completed = Some(Stage::Trace);
    run
}
