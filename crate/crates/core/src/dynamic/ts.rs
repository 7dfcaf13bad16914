use std::collections::BTreeMap;
use std::time::Instant;

use crate::dynamic::ast::ProcExpr;
use crate::dynamic::edges::EdgeSet;
use crate::error::Result;
use crate::eval::{EvalStats, Evaluator};
use crate::module::Valuation;
use crate::structure::Universe;

/// Labelled transition system of a process expression: one edge relation
/// per distinct closed subexpression, keyed by its printed form.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    pub universe: Universe,
    pub edges: BTreeMap<String, EdgeSet>,
    /// Label of the whole expression.
    pub root: String,
}

impl TransitionSystem {
    pub fn root_edges(&self) -> &EdgeSet {
        &self.edges[&self.root]
    }
}

/// Builds the transition system of `a`. Subexpressions mentioning a module
/// variable bound inside `a` have no standalone meaning and get no label.
pub fn build_transition_system(a: &ProcExpr, val: &Valuation, u: &Universe) -> Result<TransitionSystem> {
    Ok(build_transition_system_with_stats(a, val, u)?.0)
}

/// As [`build_transition_system`], also reporting per-label edge counts,
/// fixpoint iterations and the construction time.
pub fn build_transition_system_with_stats(
    a: &ProcExpr,
    val: &Valuation,
    u: &Universe,
) -> Result<(TransitionSystem, EvalStats)> {
    let start = Instant::now();
    let mut ev = Evaluator::new(val, u)?;
    let mut edges = BTreeMap::new();
    let mut subs = Vec::new();
    a.visit(&mut |e| subs.push(e));
    for e in subs {
        if !e.free_module_vars().iter().all(|v| val.module_vars().contains_key(v)) {
            continue;
        }
        let label = e.to_string();
        if let std::collections::btree_map::Entry::Vacant(slot) = edges.entry(label) {
            slot.insert(ev.proc(e)?);
        }
    }
    let mut stats = ev.into_stats();
    stats.edge_counts = edges.iter().map(|(k, v)| (k.clone(), v.len())).collect();
    stats.wall_time = start.elapsed();
    Ok((TransitionSystem { universe: u.clone(), edges, root: a.to_string() }, stats))
}
