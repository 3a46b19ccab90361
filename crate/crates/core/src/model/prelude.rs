use super::{Element, Megamodel, Origin};
use crate::syntax::{parse, RawModule};

pub const PRELUDE_NAME: &str = "Prelude";

/// Source of the built-in base module.
pub const PRELUDE_SOURCE: &str = include_str!("prelude.megal");

/// File name recorded in spans of prelude declarations.
pub const PRELUDE_FILE: &str = "<prelude>";

pub fn prelude_raw() -> RawModule {
    parse(PRELUDE_SOURCE, PRELUDE_FILE).expect("built-in prelude parses")
}

/// The prelude as a reflected megamodel.
pub fn prelude_module() -> Megamodel {
    let raw = prelude_raw();
    let mut model = Megamodel::new(PRELUDE_NAME);
    for stmt in &raw.statements {
        model
            .add(Element::from_statement(&stmt.kind, &stmt.span, Origin::Declared))
            .expect("built-in prelude is well-formed");
    }
    model.reflect();
    model
}
