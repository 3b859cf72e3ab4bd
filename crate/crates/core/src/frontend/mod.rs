//! Mini-SCOOP frontend: lexing, parsing, semantic checks, and lowering of
//! method bodies to control-flow graphs.

pub mod ast;
pub mod check;
pub mod compile;
pub mod ir;
mod lexer;
pub mod parser;
pub mod pretty;

pub use check::check;
pub use compile::compile;
pub use parser::parse;

use crate::diag::{no_errors, Diagnostic};
use std::sync::Arc;

/// Parses, checks and compiles a source text in one call.
///
/// Warnings are tolerated; any error-severity diagnostic aborts compilation
/// and the full diagnostic list is returned.
pub fn compile_source(source: &str) -> Result<Arc<ir::CompiledProgram>, Vec<Diagnostic>> {
    let program = parser::parse(source).map_err(|d| vec![d])?;
    let diags = check::check(&program);
    if !no_errors(&diags) {
        return Err(diags);
    }
    Ok(Arc::new(compile::compile(&program)))
}
