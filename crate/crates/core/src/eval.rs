//! Shared evaluation context for the three expression sorts, plus the
//! Knaster–Tarski iteration used by every fixpoint operator.

use std::collections::BTreeMap;
use std::time::Duration;

use crate::dynamic::EdgeSet;
use crate::error::{Error, Result};
use crate::flat::ast::{operand_arities, Operand};
use crate::module::{Binding, Valuation};
use crate::structure::{StateSet, SymbolId, Universe};

/// Counters collected while evaluating.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub universe_size: usize,
    /// Edge count per printed process expression.
    pub edge_counts: BTreeMap<String, usize>,
    /// Iterations per printed fixpoint expression (summed over re-evaluations).
    pub iteration_counts: BTreeMap<String, usize>,
    pub wall_time: Duration,
}

/// Values ordered by inclusion.
pub trait Approximant: Clone + PartialEq {
    fn is_subset(&self, other: &Self) -> bool;
}

impl Approximant for StateSet {
    fn is_subset(&self, other: &Self) -> bool {
        StateSet::is_subset(self, other)
    }
}

impl Approximant for EdgeSet {
    fn is_subset(&self, other: &Self) -> bool {
        EdgeSet::is_subset(self, other)
    }
}

/// Iterates `f` from `bottom` until it stabilizes. Returns the fixpoint and
/// the number of applications of `f`. Fails if an iterate is not a superset
/// of its predecessor.
pub fn least_fixpoint<S, F>(bottom: S, mut f: F) -> Result<(S, usize)>
where
    S: Approximant,
    F: FnMut(&S) -> Result<S>,
{
    let mut cur = bottom;
    let mut steps = 0;
    loop {
        let next = f(&cur)?;
        steps += 1;
        if !cur.is_subset(&next) {
            return Err(Error::NonMonotoneDetected);
        }
        if next == cur {
            return Ok((cur, steps));
        }
        cur = next;
    }
}

/// Least fixpoint of a set transformer over a universe.
pub fn lfp_iterate<F>(u: &Universe, f: F) -> Result<StateSet>
where
    F: FnMut(&StateSet) -> Result<StateSet>,
{
    least_fixpoint(u.empty_set(), f).map(|(s, _)| s)
}

pub struct Evaluator<'a> {
    pub(crate) val: &'a Valuation,
    pub(crate) universe: &'a Universe,
    env: Vec<(String, Binding)>,
    pub(crate) stats: EvalStats,
}

impl<'a> Evaluator<'a> {
    pub fn new(val: &'a Valuation, universe: &'a Universe) -> Result<Self> {
        if **val.sig() != **universe.sig() {
            return Err(Error::IncompleteStructure);
        }
        Ok(Evaluator {
            val,
            universe,
            env: Vec::new(),
            stats: EvalStats { universe_size: universe.size(), ..EvalStats::default() },
        })
    }

    pub fn stats(&self) -> &EvalStats {
        &self.stats
    }

    pub fn into_stats(self) -> EvalStats {
        self.stats
    }

    pub(crate) fn lookup(&self, var: &str) -> Option<&Binding> {
        self.env
            .iter()
            .rev()
            .find(|(v, _)| v == var)
            .map(|(_, b)| b)
            .or_else(|| self.val.module_vars().get(var))
    }

    pub(crate) fn with_binding<T>(
        &mut self,
        var: &str,
        value: Binding,
        f: impl FnOnce(&mut Self) -> Result<T>,
    ) -> Result<T> {
        self.env.push((var.to_string(), value));
        let out = f(self);
        self.env.pop();
        out
    }

    pub(crate) fn record_iterations(&mut self, label: String, steps: usize) {
        *self.stats.iteration_counts.entry(label).or_insert(0) += steps;
    }
}

/// Resolved operands of `lhs ≡ rhs`: the symbol of a variable operand, or
/// the packed field of a constant.
pub(crate) fn resolve_selection(val: &Valuation, lhs: &Operand, rhs: &Operand) -> Result<SelectOperands> {
    let arity = operand_arities(lhs, rhs, val)?;
    let resolve = |op: &Operand| -> Result<(Option<SymbolId>, u128)> {
        match op {
            Operand::Var(v) => Ok((Some(val.symbol_of(v)?), 0)),
            Operand::Const(c) => {
                let domain = val.sig().domain();
                Ok((None, c.resolve(domain, arity)?.to_field(domain.len())))
            }
        }
    };
    Ok(SelectOperands { lhs: resolve(lhs)?, rhs: resolve(rhs)? })
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SelectOperands {
    pub lhs: (Option<SymbolId>, u128),
    pub rhs: (Option<SymbolId>, u128),
}

impl SelectOperands {
    pub fn value(sig: &crate::structure::Signature, op: (Option<SymbolId>, u128), bits: u128) -> u128 {
        match op {
            (Some(sym), _) => sig.field(bits, sym),
            (None, c) => c,
        }
    }

    pub fn holds(&self, sig: &crate::structure::Signature, bits: u128) -> bool {
        Self::value(sig, self.lhs, bits) == Self::value(sig, self.rhs, bits)
    }
}
