//! `megal` command-line driver: `check`, `graph`, `trace` and `explore` over
//! a root `.megal` module.
//!
//! Exit status: 0 on success, 1 when the run reports errors or violations
//! (with `--strict`, also incomplete verification), 2 on usage errors.

mod explore;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use megal_core::config::{Config, CONFIG_FILE_NAME};
use megal_core::diagnostics::Diagnostic;
use megal_core::evaluation::Status;
use megal_core::pipeline::{run_pipeline, PipelineOptions, PipelineRun, Stage};
use megal_core::trace::{export_graph, format_trace_table, render_trace_table, ExportFormat};

#[derive(Parser)]
#[command(name = "megal", version, about = "Check, explore and trace megamodels against the artifacts they describe")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline and report diagnostics and statuses.
    Check(CheckArgs),
    /// Export the inferred model and its traces.
    Graph(GraphArgs),
    /// Print the trace table of a correspondsTo statement.
    Trace(TraceArgs),
    /// Print the exploration index as JSON.
    Explore(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Root module file.
    root: PathBuf,
    /// Config file [default: megal.config.json next to the root module, then in the current directory].
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra directory searched for imported modules.
    #[arg(long = "module-path")]
    module_paths: Vec<PathBuf>,
    /// Include prelude elements in model output.
    #[arg(long)]
    include_prelude: bool,
    /// Print the stage event log to stderr.
    #[arg(long)]
    verbose: bool,
    /// Write the canonical JSON of the final model to this file.
    #[arg(long)]
    emit_model: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    /// Also fail on NotEvaluated and Unresolved statements.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// `dot` or `json`.
    #[arg(long, default_value = "dot")]
    format: String,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// `subject/object` of the correspondsTo statement; every trace when omitted.
    #[arg(long)]
    select: Option<String>,
}

struct UsageError(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Graph(args) => cmd_graph(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Explore(args) => cmd_explore(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(UsageError(message)) => {
            eprintln!("megal: {message}");
            ExitCode::from(2)
        }
    }
}

fn find_config(common: &CommonArgs) -> Option<PathBuf> {
    if let Some(path) = &common.config {
        return Some(path.clone());
    }
    let beside_root = common.root.parent().map(|d| d.join(CONFIG_FILE_NAME));
    [beside_root, Some(PathBuf::from(CONFIG_FILE_NAME))].into_iter().flatten().find(|p| p.is_file())
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

/// Load the config and run the pipeline. The workspace root is the config
/// file's directory, or the root module's directory without a config.
fn run(common: &CommonArgs) -> Result<PipelineRun, UsageError> {
    if !common.root.is_file() {
        return Err(UsageError(format!("no such module file: {}", common.root.display())));
    }
    let root_file = absolute(&common.root);
    let (config, workspace_root) = match find_config(common) {
        Some(path) => {
            let config = Config::load(&path).map_err(|e| UsageError(e.to_string()))?;
            let dir = absolute(&path).parent().map(Path::to_path_buf).unwrap_or_default();
            (config, dir)
        }
        None => (Config::default(), root_file.parent().map(Path::to_path_buf).unwrap_or_default()),
    };
    let module_paths = common.module_paths.iter().map(|p| absolute(p)).collect();
    let options = PipelineOptions::new(&workspace_root, config, module_paths).map_err(|e| UsageError(e.to_string()))?;
    let run = run_pipeline(&root_file, &options);
    if common.verbose {
        for event in run.workspace.events() {
            eprintln!("event {}: {}", event.stage, event.detail);
        }
    }
    if let Some(path) = &common.emit_model {
        let text = run.model.to_canonical_json(common.include_prelude).to_string();
        fs::write(path, text + "\n").map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(run)
}

fn print_diagnostics(diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("{d}");
    }
}

/// Exit status of the non-check commands: 1 if the pipeline stopped early.
fn finished(run: &PipelineRun) -> u8 {
    u8::from(run.completed != Some(Stage::Trace))
}

fn summary_json(run: &PipelineRun) -> Value {
    json!({
        "satisfied": run.report.count(Status::Satisfied),
        "violated": run.report.count(Status::Violated),
        "notEvaluated": run.report.count(Status::NotEvaluated),
        "unresolved": run.report.count(Status::Unresolved),
        "total": run.report.results.len(),
    })
}

fn cmd_check(args: &CheckArgs) -> Result<u8, UsageError> {
    let run = run(&args.common)?;
    let report = &run.report;
    match args.format {
        ReportFormat::Text => {
            for d in &run.diagnostics {
                println!("{d}");
            }
            for result in &report.results {
                println!("{}\t{}", result.statement, result.status);
            }
            println!(
                "summary: satisfied={} violated={} notEvaluated={} unresolved={} total={}",
                report.count(Status::Satisfied),
                report.count(Status::Violated),
                report.count(Status::NotEvaluated),
                report.count(Status::Unresolved),
                report.results.len()
            );
        }
        ReportFormat::Json => {
            let results: Vec<Value> = report
                .results
                .iter()
                .map(|r| {
                    json!({
                        "statement": r.statement.to_string(),
                        "status": r.status,
                        "evaluators": r.evaluators,
                        "messages": r.messages,
                    })
                })
                .collect();
            let out = json!({"diagnostics": run.diagnostics, "statements": results, "summary": summary_json(&run)});
            println!("{out}");
        }
    }
    let incomplete = report.count(Status::NotEvaluated) + report.count(Status::Unresolved) > 0;
    let failed = run.has_errors() || report.count(Status::Violated) > 0 || (args.strict && incomplete);
    Ok(u8::from(failed))
}

fn cmd_graph(args: &GraphArgs) -> Result<u8, UsageError> {
    let format: ExportFormat =
        args.format.parse().map_err(|e: megal_core::trace::ExportError| UsageError(e.to_string()))?;
    let run = run(&args.common)?;
    print_diagnostics(&run.diagnostics);
    let text = export_graph(&run.model, &run.traces, format, args.common.include_prelude);
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
    Ok(finished(&run))
}

fn cmd_trace(args: &TraceArgs) -> Result<u8, UsageError> {
    let selector = match &args.select {
        Some(s) => {
            let (subject, object) = s
                .split_once('/')
                .ok_or_else(|| UsageError(format!("selector `{s}` is not of the form subject/object")))?;
            Some((subject.to_string(), object.to_string()))
        }
        None => None,
    };
    let run = run(&args.common)?;
    print_diagnostics(&run.diagnostics);
    let graphs: Vec<_> = run
        .traces
        .iter()
        .filter(|g| selector.as_ref().is_none_or(|(s, o)| g.subject == *s && g.object == *o))
        .collect();
    if let (Some((s, o)), true) = (&selector, graphs.is_empty()) {
        eprintln!("megal: no such statement: `{s} correspondsTo {o}`");
        return Ok(1);
    }
    let tables: Vec<String> =
        graphs.iter().map(|g| format_trace_table(&render_trace_table(&run.model, &run.bindings, g))).collect();
    print!("{}", tables.join("\n"));
    Ok(finished(&run))
}

fn cmd_explore(args: &CommonArgs) -> Result<u8, UsageError> {
    let run = run(args)?;
    print_diagnostics(&run.diagnostics);
    println!("{}", explore::index(&run, args.include_prelude));
    Ok(finished(&run))
}
