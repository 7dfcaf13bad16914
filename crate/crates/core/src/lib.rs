//! Model-theoretic algebras of modular systems: a set-of-structures algebra,
//! a dynamic algebra of binary relations on structures, a modal fixpoint
//! logic over it, and the computational tasks built on them.

pub mod dynamic;
pub mod error;
pub mod eval;
pub mod flat;
pub mod frontend;
pub mod lmumu;
pub mod module;
pub mod structure;
pub mod tasks;
#[cfg(test)]
mod testutil;

pub use dynamic::{eval_dyn, Dir, EdgeSet, ProcExpr};
pub use error::{Error, Result};
pub use eval::{lfp_iterate, EvalStats};
pub use flat::{eval_flat, FlatExpr, Operand};
pub use lmumu::{eval_state, StateExpr};
pub use module::{module_membership, AtomicModule, Binding, Builtin, Valuation};
pub use structure::{build_universe, Domain, RelationValue, Signature, StateSet, Structure, Universe, Vocabulary};
