//! Concrete syntax: tokenizer, parser and pretty-printer for `.megal` modules.
//!
//! Grammar (one statement per line, blank lines and `//` comments ignored):
//!
//! ```text
//! module     = header { NEWLINE statement }
//! header     = "module" IDENT [ "import" "(" item { "," item } ")" ]
//! item       = IDENT [ "[" rename { "," rename } "]" ]
//! rename     = IDENT "->" IDENT
//! statement  = IDENT ":" IDENT [ "+" ]                 (* entity declaration *)
//!            | IDENT ":" IDENT "->" IDENT              (* function declaration *)
//!            | IDENT "<" IDENT "*" IDENT               (* relationship type *)
//!            | IDENT "<" IDENT                         (* entity type *)
//!            | IDENT "(" IDENT ")" "|->" IDENT         (* function application *)
//!            | IDENT "=" STRING                        (* binding *)
//!            | IDENT IDENT IDENT                       (* relationship *)
//! ```
//!
//! `→` is accepted for `->` and `↦` for `|->`. Strings use `'` or `"`.
//! Newlines inside the import list and directly after `=` do not end a
//! statement. A function application may also be written with `->`, as in
//! `EMFGenerator(genModel) → javaFiles`.

mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::Serialize;

pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::parse;
pub use printer::{print_module, print_statement};

/// Location of a construct in a source file. Lines and columns are 1-based;
/// columns count characters, `length` counts bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StatementKind {
    EntityDecl { name: String, ty: String, many: bool },
    EntityTypeDecl { name: String, supertype: String },
    RelTypeDecl { name: String, left: String, right: String },
    FuncDecl { name: String, domain: String, range: String },
    FuncApp { function: String, input: String, output: String },
    RelStmt { subject: String, predicate: String, object: String },
    Binding { subject: String, uri: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawStatement {
    pub kind: StatementKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rename {
    pub old: String,
    pub new: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportItem {
    pub module: String,
    pub renames: Vec<Rename>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawModule {
    pub name: String,
    pub file: String,
    pub imports: Vec<ImportItem>,
    pub statements: Vec<RawStatement>,
    pub header_span: SourceSpan,
}

/// Module name, imports with their renames, and statement kinds.
pub type ModuleShape = (String, Vec<(String, Vec<(String, String)>)>, Vec<StatementKind>);

impl RawModule {
    /// Structural view without spans, used to compare modules.
    pub fn shape(&self) -> ModuleShape {
        (
            self.name.clone(),
            self.imports
                .iter()
                .map(|i| (i.module.clone(), i.renames.iter().map(|r| (r.old.clone(), r.new.clone())).collect()))
                .collect(),
            self.statements.iter().map(|s| s.kind.clone()).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    UnterminatedString,
    IllegalCharacter,
    UnexpectedToken,
    MissingModuleHeader,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct SyntaxError {
    pub kind: SyntaxErrorKind,
    pub span: SourceSpan,
    pub message: String,
    pub expected: Option<String>,
}
