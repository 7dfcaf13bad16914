use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::eval::{least_fixpoint, resolve_selection, EvalStats, Evaluator};
use crate::flat::ast::FlatExpr;
use crate::module::{Binding, Valuation};
use crate::structure::{StateSet, Universe};

/// `⟦e⟧` as a subset of `u`.
pub fn eval_flat(e: &FlatExpr, val: &Valuation, u: &Universe) -> Result<StateSet> {
    Evaluator::new(val, u)?.flat(e)
}

pub fn eval_flat_with_stats(
    e: &FlatExpr,
    val: &Valuation,
    u: &Universe,
) -> Result<(StateSet, EvalStats)> {
    let start = std::time::Instant::now();
    let mut ev = Evaluator::new(val, u)?;
    let set = ev.flat(e)?;
    let mut stats = ev.into_stats();
    stats.wall_time = start.elapsed();
    Ok((set, stats))
}

impl Evaluator<'_> {
    pub fn flat(&mut self, e: &FlatExpr) -> Result<StateSet> {
        let u = self.universe;
        let sig = u.sig().clone();
        match e {
            FlatExpr::Bottom => Ok(u.empty_set()),
            FlatExpr::Atom { module, args } => {
                let syms = self.val.resolve_atom(module, args)?;
                let m = self.val.module(module)?;
                Ok(StateSet::from_indices(
                    u.size(),
                    (0..u.size()).filter(|&i| m.contains_bits(&sig, &syms, u.bits_at(i))),
                ))
            }
            FlatExpr::Var(z) => match self.lookup(z) {
                Some(Binding::States(s)) if s.universe_len() == u.size() => Ok(s.clone()),
                Some(_) => Err(Error::ShapeMismatch(z.clone())),
                None => Err(Error::UnboundModuleVar(z.clone())),
            },
            FlatExpr::Union(a, b) => Ok(self.flat(a)?.union(&self.flat(b)?)),
            FlatExpr::Complement(a) => Ok(self.flat(a)?.complement()),
            FlatExpr::Project { keep, inner } => {
                let inner_set = self.flat(inner)?;
                let syms = keep.iter().map(|v| self.val.symbol_of(v)).collect::<Result<Vec<_>>>()?;
                let mask = sig.mask_of(syms);
                let keys: HashSet<u128> =
                    inner_set.iter().map(|i| u.bits_at(i) & mask).collect();
                Ok(StateSet::from_indices(
                    u.size(),
                    (0..u.size()).filter(|&i| keys.contains(&(u.bits_at(i) & mask))),
                ))
            }
            FlatExpr::Select { lhs, rhs, inner } => {
                let ops = resolve_selection(self.val, lhs, rhs)?;
                let inner_set = self.flat(inner)?;
                Ok(StateSet::from_indices(
                    u.size(),
                    inner_set.iter().filter(|&i| ops.holds(&sig, u.bits_at(i))),
                ))
            }
            FlatExpr::Lfp { var, body } => {
                let (set, steps) = least_fixpoint(u.empty_set(), |approx| {
                    self.with_binding(var, Binding::States(approx.clone()), |ev| ev.flat(body))
                })?;
                self.record_iterations(e.to_string(), steps);
                Ok(set)
            }
        }
    }
}
