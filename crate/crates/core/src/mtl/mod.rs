//! The transformation language: syntax tree, parser, printer, static checker
//! and interpreter.

pub mod ast;
mod check;
mod exec;
mod parser;
mod printer;

pub use ast::*;
pub use check::{static_check, StaticViolation};
pub use exec::{eval_expr, execute, execute_traced, ExecutionFailure, ObjRef, RtValue, RuntimeError, TraceLink};
pub use parser::{parse_expr, parse_transformation, SyntaxError};
pub use printer::{expr_to_string, pretty_print};
