//! Pointwise membership and expansion search for flat expressions.
//!
//! Works directly on packed structures, so it never materializes a universe
//! unless a fixpoint or module variable forces it. Expansions are found by
//! assigning one symbol at a time and pruning with a three-valued partial
//! evaluation: an atom is decided once all its symbols are assigned, a
//! projection once its kept symbols are assigned.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::eval::resolve_selection;
use crate::flat::ast::FlatExpr;
use crate::flat::eval::eval_flat;
use crate::module::Valuation;
use crate::structure::{StateSet, SymbolId, Universe, DEFAULT_CAP};

/// Largest single symbol the search will enumerate (in slots).
const MAX_SYMBOL_SLOTS: usize = 24;

pub struct FlatSearch<'a> {
    val: &'a Valuation,
    all: u128,
    atoms: HashMap<usize, (Vec<SymbolId>, u128)>,
    projections: HashMap<(usize, u128), bool>,
    universe: Option<Universe>,
    fixpoints: HashMap<usize, StateSet>,
}

fn key(e: &FlatExpr) -> usize {
    e as *const FlatExpr as usize
}

impl<'a> FlatSearch<'a> {
    pub fn new(val: &'a Valuation) -> Self {
        FlatSearch {
            val,
            all: val.sig().all_mask(),
            atoms: HashMap::new(),
            projections: HashMap::new(),
            universe: None,
            fixpoints: HashMap::new(),
        }
    }

    /// Exact membership of a packed structure.
    pub fn holds(&mut self, e: &FlatExpr, bits: u128) -> Result<bool> {
        Ok(self.partial(e, bits, self.all)?.expect("full assignment decides every node"))
    }

    /// Calls `visit` on every structure satisfying `e` that agrees with
    /// `base` on `fixed`; stops early when `visit` returns false.
    pub fn expansions(
        &mut self,
        e: &FlatExpr,
        base: u128,
        fixed: u128,
        visit: &mut dyn FnMut(u128) -> bool,
    ) -> Result<()> {
        let sig = self.val.sig().clone();
        let fixed = fixed & self.all;
        let mentioned: BTreeSet<SymbolId> = e
            .occurring_vars()
            .iter()
            .filter_map(|v| self.val.symbol_of(v).ok())
            .collect();
        let mut order: Vec<SymbolId> = (0..sig.vocab().len())
            .filter(|&s| sig.mask(s) & !fixed != 0)
            .collect();
        order.sort_by_key(|s| !mentioned.contains(s));
        for &s in &order {
            if sig.symbol_slots(s) > MAX_SYMBOL_SLOTS {
                return Err(Error::CapExceeded { bits: sig.symbol_slots(s), cap: MAX_SYMBOL_SLOTS });
            }
        }
        self.descend(e, &order, 0, base & fixed, fixed, visit).map(|_| ())
    }

    /// First expansion, if any.
    pub fn first_expansion(&mut self, e: &FlatExpr, base: u128, fixed: u128) -> Result<Option<u128>> {
        let mut found = None;
        self.expansions(e, base, fixed, &mut |b| {
            found = Some(b);
            false
        })?;
        Ok(found)
    }

    fn descend(
        &mut self,
        e: &FlatExpr,
        order: &[SymbolId],
        depth: usize,
        bits: u128,
        assigned: u128,
        visit: &mut dyn FnMut(u128) -> bool,
    ) -> Result<bool> {
        let sig = self.val.sig().clone();
        if depth == order.len() {
            if self.holds(e, bits)? {
                return Ok(visit(bits));
            }
            return Ok(true);
        }
        let sym = order[depth];
        let mask = sig.mask(sym);
        // Slots of a partially fixed symbol keep their fixed values.
        let fixed_part = assigned & mask;
        let assigned = assigned | mask;
        for field in 0..(1u128 << sig.symbol_slots(sym)) {
            let next = sig.set_field(bits, sym, field);
            if (next ^ bits) & fixed_part != 0 {
                continue;
            }
            if depth + 1 < order.len() && self.partial(e, next, assigned)? == Some(false) {
                continue;
            }
            if !self.descend(e, order, depth + 1, next, assigned, visit)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn atom(&mut self, e: &FlatExpr, module: &str, args: &[String]) -> Result<(Vec<SymbolId>, u128)> {
        if let Some(r) = self.atoms.get(&key(e)) {
            return Ok(r.clone());
        }
        let syms = self.val.resolve_atom(module, args)?;
        let mask = self.val.sig().mask_of(syms.iter().copied());
        self.atoms.insert(key(e), (syms.clone(), mask));
        Ok((syms, mask))
    }

    /// Kleene evaluation given that only the `assigned` slots of `bits` are known.
    fn partial(&mut self, e: &FlatExpr, bits: u128, assigned: u128) -> Result<Option<bool>> {
        let sig = self.val.sig().clone();
        match e {
            FlatExpr::Bottom => Ok(Some(false)),
            FlatExpr::Atom { module, args } => {
                let (syms, mask) = self.atom(e, module, args)?;
                if mask & !assigned != 0 {
                    return Ok(None);
                }
                Ok(Some(self.val.module(module)?.contains_bits(&sig, &syms, bits)))
            }
            FlatExpr::Union(a, b) => {
                let x = self.partial(a, bits, assigned)?;
                if x == Some(true) {
                    return Ok(x);
                }
                let y = self.partial(b, bits, assigned)?;
                Ok(match (x, y) {
                    (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                })
            }
            FlatExpr::Complement(a) => Ok(self.partial(a, bits, assigned)?.map(|b| !b)),
            FlatExpr::Select { lhs, rhs, inner } => {
                let syms: Vec<SymbolId> = [lhs, rhs]
                    .iter()
                    .filter_map(|o| o.var())
                    .map(|v| self.val.symbol_of(v))
                    .collect::<Result<_>>()?;
                if sig.mask_of(syms) & !assigned == 0 {
                    let ops = resolve_selection(self.val, lhs, rhs)?;
                    if !ops.holds(&sig, bits) {
                        return Ok(Some(false));
                    }
                    return self.partial(inner, bits, assigned);
                }
                match self.partial(inner, bits, assigned)? {
                    Some(false) => Ok(Some(false)),
                    _ => Ok(None),
                }
            }
            FlatExpr::Project { keep, inner } => {
                let syms = keep.iter().map(|v| self.val.symbol_of(v)).collect::<Result<Vec<_>>>()?;
                let mask = sig.mask_of(syms);
                if mask & !assigned != 0 {
                    return Ok(None);
                }
                let k = (key(e), bits & mask);
                if let Some(&r) = self.projections.get(&k) {
                    return Ok(Some(r));
                }
                let found = self.first_expansion(inner, bits & mask, mask)?.is_some();
                self.projections.insert(k, found);
                Ok(Some(found))
            }
            FlatExpr::Var(_) | FlatExpr::Lfp { .. } => {
                if assigned != self.all {
                    return Ok(None);
                }
                self.materialize(e)?;
                let u = self.universe.as_ref().expect("materialized");
                Ok(Some(u.index_of_bits(bits).is_some_and(|i| self.fixpoints[&key(e)].contains(i))))
            }
        }
    }

    fn materialize(&mut self, e: &FlatExpr) -> Result<()> {
        if self.universe.is_none() {
            self.universe = Some(Universe::new(self.val.sig().clone(), DEFAULT_CAP)?);
        }
        if !self.fixpoints.contains_key(&key(e)) {
            let set = eval_flat(e, self.val, self.universe.as_ref().expect("built above"))?;
            self.fixpoints.insert(key(e), set);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat::ast::Operand;
    use crate::module::{AtomicModule, Builtin};
    use crate::structure::{Domain, Signature, Vocabulary};
    use proptest::prelude::*;

    fn setup() -> (Valuation, Universe) {
        let sig = Signature::new(
            Domain::new(["a", "b"]).unwrap(),
            Vocabulary::new([("P", 1), ("Q", 1), ("R", 1)]).unwrap(),
        )
        .unwrap();
        let u = Universe::new(sig.clone(), DEFAULT_CAP).unwrap();
        let val = Valuation::new(sig)
            .with_module(AtomicModule::builtin("Full", vec![("X".into(), 1)], Builtin::Full).unwrap())
            .with_module(AtomicModule::builtin("Single", vec![("X".into(), 1)], Builtin::Singleton).unwrap())
            .with_module(
                AtomicModule::builtin("Empty2", vec![("X".into(), 1), ("Y".into(), 1)], Builtin::Empty)
                    .unwrap(),
            );
        (val, u)
    }

    fn arb_expr() -> impl Strategy<Value = FlatExpr> {
        let var = prop::sample::select(vec!["P", "Q", "R"]);
        let leaf = prop_oneof![
            Just(FlatExpr::Bottom),
            var.clone().prop_map(|v| FlatExpr::atom("Full", [v])),
            var.clone().prop_map(|v| FlatExpr::atom("Single", [v])),
            (var.clone(), var.clone()).prop_map(|(a, b)| FlatExpr::atom("Empty2", [a, b])),
        ];
        leaf.prop_recursive(4, 24, 2, move |inner| {
            let var = prop::sample::select(vec!["P", "Q", "R"]);
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| FlatExpr::union(a, b)),
                inner.clone().prop_map(FlatExpr::complement),
                (inner.clone(), var.clone()).prop_map(|(a, v)| FlatExpr::project([v], a)),
                (inner.clone(), var.clone(), var.clone()).prop_map(|(a, x, y)| {
                    FlatExpr::select(Operand::Var(x.into()), Operand::Var(y.into()), a)
                }),
                (inner.clone(), inner).prop_map(|(a, b)| FlatExpr::lfp("Z", FlatExpr::union(a, FlatExpr::intersection(FlatExpr::var("Z"), b)))),
            ]
        })
    }

    proptest! {
        #[test]
        fn pointwise_matches_set_semantics(e in arb_expr(), fixed_syms in 0usize..8) {
            let (val, u) = setup();
            let set = eval_flat(&e, &val, &u).unwrap();
            let mut search = FlatSearch::new(&val);
            for i in 0..u.size() {
                prop_assert_eq!(search.holds(&e, u.bits_at(i)).unwrap(), set.contains(i));
            }
            let sig = val.sig().clone();
            let fixed = sig.mask_of((0..3).filter(|s| fixed_syms >> s & 1 == 1));
            let base = u.bits_at(u.size() / 3);
            let mut found = Vec::new();
            search.expansions(&e, base, fixed, &mut |b| { found.push(b); true }).unwrap();
            found.sort();
            let expected: Vec<u128> = set
                .iter()
                .map(|i| u.bits_at(i))
                .filter(|b| (b ^ base) & fixed == 0)
                .collect();
            prop_assert_eq!(found, expected);
        }
    }
}
