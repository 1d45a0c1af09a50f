//! Java-subset frontend: source text to [`CompilationUnitIR`].
//!
//! The IR (see [`ir`]) is the stable contract; the parser here is a
//! convenience layer on top of it. Methods using constructs outside the
//! subset are skipped with a `skipped-method` diagnostic.

pub mod ast;
mod inline;
pub mod ir;
mod jlex;
pub mod jparse;
mod lower;
mod schema;
mod validate;

use thiserror::Error;

pub use inline::inline_local_helpers;
pub use ir::*;
pub use schema::{dump_ir, dump_ir_string, load_ir, IR_SCHEMA_VERSION};
pub use validate::{validate_method, validate_unit};

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("{location}: syntax error: {message}")]
    Syntax {
        location: SourceLocation,
        message: String,
    },
    #[error("IR schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid IR: {0}")]
    InvalidIr(String),
}

/// Parse one Java source file. Only unrecoverable syntax errors (outside any
/// method body) fail the whole unit.
pub fn parse_java(source: &str, path: &str) -> Result<CompilationUnitIR, FrontendError> {
    let unit = jparse::parse_unit(source).map_err(|e| FrontendError::Syntax {
        location: SourceLocation::new(path, e.pos.line.max(1), e.pos.col.max(1)),
        message: e.message,
    })?;
    Ok(lower::lower_unit(&unit, path))
}
