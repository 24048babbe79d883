//! Surface syntax, printing and grounding.

mod ast;
mod ground;
mod lexer;
mod parser;

pub use ast::*;
pub use ground::{ground, AtomId, GAggregate, GBody, GLit, GRule, GroundProgram};
pub use parser::parse;

/// Parses and grounds in one step.
pub fn load(src: &str) -> crate::Result<GroundProgram> {
    Ok(ground(&parse(src)?)?)
}
