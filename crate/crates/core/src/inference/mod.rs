//! Fixed-point inference. Each round applies every inferrer to every element
//! of a snapshot of the model, sorts the collected additions canonically and
//! inserts them. The run stops at the first round that adds nothing.
//! Inferrers may only add elements, so the model grows monotonically.

mod builtins;

use std::collections::BTreeMap;

use crate::diagnostics::Diagnostic;
use crate::model::{Element, Megamodel};
use crate::resolver::{resolve_binding, BindingTable, Workspace};

pub use builtins::{object_parts, sanitize, AnnotationScheme, ElementOfLifting, Parts, SubsetTransitivity};

/// Read-only view handed to inferrers.
pub struct InferenceContext<'a> {
    pub model: &'a Megamodel,
    pub bindings: &'a BindingTable,
    pub workspace: &'a Workspace,
    pub knowledge_map: &'a BTreeMap<String, String>,
    pub part_depth: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Inferred {
    pub additions: Vec<Element>,
    pub messages: Vec<String>,
}

impl Inferred {
    pub fn of(additions: Vec<Element>) -> Inferred {
        Inferred { additions, messages: Vec::new() }
    }
}

pub trait Inferrer: Send + Sync {
    fn name(&self) -> &str;

    fn applies_to(&self, element: &Element) -> bool;

    /// Elements implied by `element`. An `Err` marks the inferrer as faulty;
    /// it is skipped for the rest of the run.
    fn infer(&self, ctx: &InferenceContext<'_>, element: &Element) -> Result<Inferred, String>;
}

/// Names of the built-in inferrers, in default order.
pub const BUILTIN_INFERRERS: [&str; 4] = ["subsetTransitivity", "elementOfLifting", "parts", "annotationScheme"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown inferrer `{0}`")]
pub struct UnknownInferrer(pub String);

pub fn builtin_inferrer(name: &str) -> Result<Box<dyn Inferrer>, UnknownInferrer> {
    Ok(match name {
        "subsetTransitivity" => Box::new(SubsetTransitivity),
        "elementOfLifting" => Box::new(ElementOfLifting),
        "parts" => Box::new(Parts),
        "annotationScheme" => Box::new(AnnotationScheme),
        other => return Err(UnknownInferrer(other.to_string())),
    })
}

/// Inferrers selected by name; `None` selects every built-in.
pub fn select_inferrers(names: Option<&[String]>) -> Result<Vec<Box<dyn Inferrer>>, UnknownInferrer> {
    match names {
        Some(names) => names.iter().map(|n| builtin_inferrer(n)).collect(),
        None => BUILTIN_INFERRERS.iter().map(|n| builtin_inferrer(n)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub max_rounds: usize,
    pub part_depth: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_rounds: crate::config::DEFAULT_MAX_ROUNDS, part_depth: crate::config::DEFAULT_PART_DEPTH }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InferenceStats {
    /// Rounds executed, including the final round that added nothing.
    pub rounds: usize,
    pub added: usize,
}

#[derive(Debug, Clone, Default)]
pub struct InferenceOutcome {
    pub stats: InferenceStats,
    pub diagnostics: Vec<Diagnostic>,
    pub reached_fixed_point: bool,
}

/// Run `inferrers` over `model` until nothing new is added or
/// `cfg.max_rounds` is exhausted (E401). Newly added bindings are resolved
/// into `bindings` at the end of each round.
pub fn run_inference(
    model: &mut Megamodel,
    bindings: &mut BindingTable,
    workspace: &Workspace,
    knowledge_map: &BTreeMap<String, String>,
    inferrers: &[Box<dyn Inferrer>],
    cfg: EngineConfig,
) -> InferenceOutcome {
    let mut outcome = InferenceOutcome::default();
    let mut faulted = vec![false; inferrers.len()];
    workspace.log("inference", "start");
    while outcome.stats.rounds < cfg.max_rounds.max(1) {
        outcome.stats.rounds += 1;
        let snapshot = model.elements();
        let mut additions = Vec::new();
        {
            let ctx = InferenceContext { model, bindings, workspace, knowledge_map, part_depth: cfg.part_depth };
            for (i, inferrer) in inferrers.iter().enumerate() {
                for element in &snapshot {
                    if faulted[i] || !inferrer.applies_to(element) {
                        continue;
                    }
                    match inferrer.infer(&ctx, element) {
                        Ok(result) => {
                            additions.extend(result.additions);
                            outcome.diagnostics.extend(
                                result
                                    .messages
                                    .into_iter()
                                    .map(|m| Diagnostic::info("I401", format!("{}: {m}", inferrer.name()))),
                            );
                        }
                        Err(message) => {
                            faulted[i] = true;
                            outcome.diagnostics.push(Diagnostic::warning(
                                "W401",
                                format!("inferrer `{}` failed and was skipped: {message}", inferrer.name()),
                            ));
                        }
                    }
                }
            }
        }
        additions.sort_by_key(Element::canonical_key);
        additions.dedup_by(|a, b| a.canonical_key() == b.canonical_key());
        let mut added = 0;
        for element in additions {
            let binding = match &element {
                Element::Binding(b) => Some(b.clone()),
                _ => None,
            };
            match model.add(element) {
                Ok(true) => {
                    added += 1;
                    if let Some(b) = binding {
                        outcome.diagnostics.extend(resolve_binding(model, workspace, bindings, &b));
                    }
                }
                Ok(false) => {}
                Err(err) => {
                    let diag = Diagnostic::warning("W402", format!("inferred element rejected: {err}"));
                    if !outcome.diagnostics.contains(&diag) {
                        outcome.diagnostics.push(diag);
                    }
                }
            }
        }
        outcome.stats.added += added;
        if added == 0 {
            outcome.reached_fixed_point = true;
            break;
        }
    }
    if !outcome.reached_fixed_point {
        outcome.diagnostics.push(Diagnostic::error(
            "E401",
            format!("inference did not reach a fixed point within {} rounds", cfg.max_rounds),
        ));
    }
    workspace.log("inference", format!("done rounds={} added={}", outcome.stats.rounds, outcome.stats.added));
    outcome
}
