//! Algebra of binary relations on structures.

pub mod ast;
pub mod edges;
pub mod eval;
pub mod image;
pub mod ts;

pub use ast::{Dir, ProcExpr};
pub use edges::{EdgeSet, PAIR_CAP};
pub use eval::{eval_dyn, eval_dyn_with_stats};
pub use image::{Cube, ImageEvaluator};
pub use ts::{build_transition_system, build_transition_system_with_stats, TransitionSystem};
