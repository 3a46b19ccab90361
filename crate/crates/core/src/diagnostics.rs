//! Diagnostics shared by every pipeline stage.
//!
//! Codes are stable. `E` codes are errors, `W` warnings, `I` informational.
//!
//! | code | meaning |
//! |------|---------|
//! | E001 | unknown name |
//! | E002 | conflicting declaration |
//! | E003 | relationship operands match no signature |
//! | E004 | unknown relationship type |
//! | E005 | function application target is not a function |
//! | E006 | cardinality-one artifact with multiple bindings |
//! | E007 | malformed binding URI |
//! | E008 | function domain/range is not a language |
//! | E010 | syntax error |
//! | E011 | missing module header |
//! | E020 | module not found |
//! | E021 | import cycle |
//! | E022 | rename target unknown |
//! | E023 | rename collision |
//! | E201 | cardinality-one artifact resolves to zero or several objects |
//! | E301 | relationship violated |
//! | E401 | inference fixed point not reached |
//! | W101 | function application operand lacks derivable `elementOf` |
//! | W102 | `facilitates` object is not a Concept |
//! | W103 | artifact has no binding |
//! | W201 | binding could not be resolved |
//! | W202 | transient capture failed |
//! | W301 | unknown plugin implementation |
//! | W302 | relationship not evaluated (no applicable analysis) |
//! | W303 | analysis fault or plugin protocol error |
//! | W401 | inferrer fault |
//! | W402 | inferred element rejected |
//! | I301 | analysis message |
//! | I401 | inferrer message |

use std::fmt;

use serde::Serialize;

use crate::syntax::SourceSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub message: String,
    pub span: Option<SourceSpan>,
    pub related: Option<SourceSpan>,
}

impl Diagnostic {
    fn new(code: &'static str, severity: Severity, message: impl Into<String>) -> Diagnostic {
        Diagnostic { code, severity, message: message.into(), span: None, related: None }
    }

    pub fn error(code: &'static str, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(code, Severity::Error, message)
    }

    pub fn warning(code: &'static str, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(code, Severity::Warning, message)
    }

    pub fn info(code: &'static str, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(code, Severity::Info, message)
    }

    pub fn with_span(mut self, span: Option<SourceSpan>) -> Diagnostic {
        self.span = span;
        self
    }

    pub fn with_related(mut self, related: Option<SourceSpan>) -> Diagnostic {
        self.related = related;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Human format: `file:line:col: severity CODE message`.
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(span) => write!(f, "{span}: ")?,
            None => f.write_str("<model>: ")?,
        }
        write!(f, "{} {} {}", self.severity, self.code, self.message)
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn human_format() {
        let d = Diagnostic::error("E003", "no signature").with_span(Some(SourceSpan {
            file: "XML.megal".into(),
            line: 4,
            column: 1,
            length: 10,
        }));
        assert_eq!(d.to_string(), "XML.megal:4:1: error E003 no signature");
        assert_eq!(Diagnostic::warning("W103", "x").to_string(), "<model>: warning W103 x");
    }
}
