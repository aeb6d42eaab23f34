//! Typed STRIPS domains and problems: parsing, type flattening and PDDL output.

mod flatten;
mod model;
mod parse;
pub mod sexpr;
mod write;

use thiserror::Error;

pub use flatten::{flatten_types, restore_hierarchy, specialize_fact, specialize_problem, specialized_name};
pub use model::*;
pub use parse::{parse_domain, parse_problem};
pub use write::{macro_operators, write_domain, write_problem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unsupported construct `{construct}` at {line}:{col}")]
    Unsupported {
        line: usize,
        col: usize,
        construct: String,
    },
    #[error("undeclared {kind} `{name}` at {line}:{col}")]
    Undeclared {
        kind: &'static str,
        name: String,
        line: usize,
        col: usize,
    },
    #[error("predicate `{predicate}` expects {expected} arguments, found {found} at {line}:{col}")]
    Arity {
        predicate: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("macro `{0}` has no compiled body")]
    UncompiledMacro(String),
    #[error("name `{0}` is already used by an operator")]
    NameCollision(String),
    #[error("problem is for domain `{found}`, expected `{expected}`")]
    DomainMismatch { expected: String, found: String },
    #[error("object `{object}` has non-atomic type `{ty}`")]
    NonAtomicObjectType { object: String, ty: String },
    #[error("object `{object}` of type `{found}` used where `{expected}` is required")]
    TypeMismatch {
        object: String,
        expected: String,
        found: String,
    },
}
