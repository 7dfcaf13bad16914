//! Two-sorted modal fixpoint logic: state formulas over process expressions.

pub mod ast;
pub mod datalog;
pub mod eval;
pub mod translate;
pub mod wellformed;

pub use ast::StateExpr;
pub use datalog::{
    datalog_certain_bounded, datalog_translate, Certainty, DatalogProgram, DlAtom, Query, Rule, Term,
};
pub use eval::{equality_test, eval_equality_test, eval_state, eval_state_with_stats};
pub use translate::{translate_proc, translate_two_sorted};
pub use wellformed::{check_positive_proc, check_positive_state};
