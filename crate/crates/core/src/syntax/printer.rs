use std::fmt::Write;

use super::{RawModule, StatementKind};

/// Render a module in canonical concrete syntax (ASCII arrows, double quotes).
pub fn print_module(module: &RawModule) -> String {
    let mut out = String::new();
    write!(out, "module {}", module.name).unwrap();
    if !module.imports.is_empty() {
        let items: Vec<String> = module
            .imports
            .iter()
            .map(|item| {
                if item.renames.is_empty() {
                    item.module.clone()
                } else {
                    let renames: Vec<String> = item.renames.iter().map(|r| format!("{} -> {}", r.old, r.new)).collect();
                    format!("{} [{}]", item.module, renames.join(", "))
                }
            })
            .collect();
        write!(out, " import ({})", items.join(", ")).unwrap();
    }
    out.push('\n');
    for stmt in &module.statements {
        out.push_str(&print_statement(&stmt.kind));
        out.push('\n');
    }
    out
}

pub fn print_statement(kind: &StatementKind) -> String {
    match kind {
        StatementKind::EntityDecl { name, ty, many } => {
            format!("{name} : {ty}{}", if *many { "+" } else { "" })
        }
        StatementKind::EntityTypeDecl { name, supertype } => format!("{name} < {supertype}"),
        StatementKind::RelTypeDecl { name, left, right } => format!("{name} < {left} * {right}"),
        StatementKind::FuncDecl { name, domain, range } => format!("{name} : {domain} -> {range}"),
        StatementKind::FuncApp { function, input, output } => {
            format!("{function}({input}) |-> {output}")
        }
        StatementKind::RelStmt { subject, predicate, object } => {
            format!("{subject} {predicate} {object}")
        }
        StatementKind::Binding { subject, uri } if uri.contains('"') => format!("{subject} = '{uri}'"),
        StatementKind::Binding { subject, uri } => format!("{subject} = \"{uri}\""),
    }
}
