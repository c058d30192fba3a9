//! The algorithm description language: syntax tree, parser, printer,
//! validation and lowering to linear form.

pub mod ast;
pub mod lower;
pub mod parser;
pub mod print;
pub mod validate;

pub use ast::{AlgorithmDef, BinOp, Expr, FuncRef, OracleDecl, OracleKind, UpdateEq};
pub use lower::{functional_rewrite, lower, parse_argmin, Atom, Channel, ChannelKind, Lin, Lowered, Mode, QuadForm};
pub use validate::validate;

use crate::error::Result;

/// Parses and validates one algorithm. The result is guaranteed to lower
/// in functional mode.
pub fn parse_algorithm(src: &str) -> Result<AlgorithmDef> {
    let def = parser::parse_syntax(src)?;
    validate(&def)?;
    lower(&def, Mode::Functional)?;
    Ok(def)
}
