//! Set-of-structures algebra over atomic modules.

pub mod ast;
pub mod eval;
pub mod search;

pub use ast::{check_wellformed, free_relational_vars, ConstRelation, FlatExpr, Operand, Violation, ViolationKind};
pub use eval::{eval_flat, eval_flat_with_stats};
pub use search::FlatSearch;
