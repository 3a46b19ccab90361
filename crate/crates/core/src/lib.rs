//! Megamodeling toolkit: parse `.megal` modules, link them, check them, bind
//! entities to artifacts, infer implied facts, verify relationships with
//! pluggable analyses and derive traceability links.

pub mod checker;
pub mod config;
pub mod diagnostics;
pub mod evaluation;
pub mod inference;
pub mod linker;
pub mod model;
pub mod pipeline;
pub mod process;
pub mod resolver;
pub mod syntax;
pub mod trace;
