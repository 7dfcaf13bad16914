//! Successor computation on sets of partially specified structures.
//!
//! A cube fixes some slots and leaves the rest free. The image of a cube set
//! under a complement-free process is again a cube set, so successors of a
//! single structure can be computed without enumerating the universe. Slots
//! in the frozen mask are never freed.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::dynamic::ast::ProcExpr;
use crate::dynamic::eval::{action_shape, bit_positions, deposit, select_cases};
use crate::error::{Error, Result};
use crate::eval::resolve_selection;
use crate::module::{Builtin, ModuleKind, Valuation};
use crate::structure::SymbolId;

/// Most cubes kept at any point of the computation.
pub const CUBE_CAP: usize = 1 << 22;
/// Most free slots split at once.
const SPLIT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cube {
    pub fixed: u128,
    /// Values of the fixed slots; zero elsewhere.
    pub bits: u128,
}

impl Cube {
    pub fn point(bits: u128, all: u128) -> Self {
        Cube { fixed: all, bits: bits & all }
    }

    pub fn contains(&self, bits: u128) -> bool {
        (bits ^ self.bits) & self.fixed == 0
    }

    /// Whether some member has `value` in the slots of `mask`.
    pub fn may_match(&self, mask: u128, value: u128) -> bool {
        (value ^ self.bits) & mask & self.fixed == 0
    }

    /// Every member, within the slots of `all`.
    pub fn members(&self, all: u128) -> Vec<u128> {
        let free = bit_positions(all & !self.fixed);
        (0..1u64 << free.len()).map(|v| self.bits | deposit(v, &free)).collect()
    }
}

pub struct ImageEvaluator<'a> {
    val: &'a Valuation,
    frozen: u128,
    all: u128,
    memo: HashMap<(usize, u128), Vec<u128>>,
    /// Flipped copies of reversed subexpressions, kept alive so memo keys
    /// (node addresses) are never reused.
    arena: Vec<Rc<ProcExpr>>,
}

fn key(e: &ProcExpr) -> usize {
    e as *const ProcExpr as usize
}

fn dedup(cubes: Vec<Cube>) -> Vec<Cube> {
    let mut seen = HashSet::with_capacity(cubes.len());
    cubes.into_iter().filter(|c| seen.insert(*c)).collect()
}

impl<'a> ImageEvaluator<'a> {
    pub fn new(val: &'a Valuation, frozen: u128) -> Self {
        let all = val.sig().all_mask();
        ImageEvaluator { val, frozen: frozen & all, all, memo: HashMap::new(), arena: Vec::new() }
    }

    /// Successor cubes of one structure.
    pub fn successors(&mut self, a: &ProcExpr, bits: u128) -> Result<Vec<Cube>> {
        self.image(a, &[Cube::point(bits, self.all)])
    }

    fn free(&self, c: Cube, mask: u128) -> Cube {
        let m = mask & !self.frozen;
        Cube { fixed: c.fixed & !m, bits: c.bits & !m }
    }

    fn split(&self, cubes: &[Cube], mask: u128) -> Result<Vec<Cube>> {
        let mut out = Vec::new();
        for c in cubes {
            let positions = bit_positions(mask & !c.fixed);
            if positions.len() > SPLIT_CAP {
                return Err(Error::CapExceeded { bits: positions.len(), cap: SPLIT_CAP });
            }
            for v in 0..1u64 << positions.len() {
                out.push(Cube { fixed: c.fixed | mask, bits: c.bits | deposit(v, &positions) });
            }
            check_cap(out.len())?;
        }
        Ok(out)
    }

    fn syms_mask(&self, syms: &[SymbolId]) -> u128 {
        self.val.sig().mask_of(syms.iter().copied())
    }

    pub fn image(&mut self, a: &ProcExpr, input: &[Cube]) -> Result<Vec<Cube>> {
        let sig = self.val.sig().clone();
        let out = match a {
            ProcExpr::Bottom => Vec::new(),
            ProcExpr::Diag => input.to_vec(),
            ProcExpr::Test { module, args } => {
                let syms = self.val.resolve_atom(module, args)?;
                let m = self.val.module(module)?;
                self.split(input, self.syms_mask(&syms))?
                    .into_iter()
                    .filter(|c| m.contains_bits(&sig, &syms, c.bits))
                    .collect()
            }
            ProcExpr::Action { module, args } => {
                let shape = action_shape(self.val, module, args)?;
                let accepts_all = matches!(self.val.module(module)?.kind(), ModuleKind::Builtin(Builtin::Any));
                let mut out = Vec::new();
                for q in self.split(input, shape.in_mask)? {
                    if accepts_all {
                        out.push(self.free(q, shape.out_mask));
                        continue;
                    }
                    let k = (key(a), q.bits & shape.in_mask);
                    if !self.memo.contains_key(&k) {
                        let outputs = shape.outputs(self.val, module, k.1)?;
                        self.memo.insert(k, outputs);
                    }
                    for &d in &self.memo[&k] {
                        if (d ^ q.bits) & shape.out_mask & self.frozen != 0 {
                            continue;
                        }
                        out.push(Cube { fixed: q.fixed | shape.out_mask, bits: (q.bits & !shape.out_mask) | d });
                    }
                    check_cap(out.len())?;
                }
                out
            }
            ProcExpr::Union(x, y) => {
                let mut out = self.image(x, input)?;
                out.extend(self.image(y, input)?);
                out
            }
            ProcExpr::Compose(x, y) => {
                let mid = self.image(x, input)?;
                self.image(y, &mid)?
            }
            ProcExpr::Project { keep, inner } => {
                let syms = keep.iter().map(|v| self.val.symbol_of(v)).collect::<Result<Vec<_>>>()?;
                let hidden = self.all & !self.syms_mask(&syms);
                let widened: Vec<Cube> = input.iter().map(|&c| self.free(c, hidden)).collect();
                let widened = dedup(widened);
                self.image(inner, &widened)?.into_iter().map(|c| self.free(c, hidden)).collect()
            }
            ProcExpr::Select { lhs, rhs, inner } => {
                let cases = select_cases(lhs, rhs, inner)?;
                let ops = resolve_selection(self.val, lhs, rhs)?;
                let op_syms: Vec<SymbolId> = [ops.lhs.0, ops.rhs.0].into_iter().flatten().collect();
                let op_mask = self.syms_mask(&op_syms);
                let mut out = Vec::new();
                if cases.on_source {
                    let kept: Vec<Cube> =
                        self.split(input, op_mask)?.into_iter().filter(|c| ops.holds(&sig, c.bits)).collect();
                    out.extend(self.image(inner, &kept)?);
                }
                if cases.on_target {
                    let res = self.image(inner, input)?;
                    out.extend(self.split(&res, op_mask)?.into_iter().filter(|c| ops.holds(&sig, c.bits)));
                }
                if let Some(left_is_input) = cases.feedback {
                    let (input_op, output_op) = if left_is_input { (ops.lhs, ops.rhs) } else { (ops.rhs, ops.lhs) };
                    let (in_sym, out_sym) = (input_op.0.expect("variable"), output_op.0.expect("variable"));
                    let (in_mask, out_mask) = (sig.mask(in_sym), sig.mask(out_sym));
                    for q in self.split(input, in_mask)? {
                        let want = sig.field(q.bits, in_sym);
                        let source = self.free(q, in_mask);
                        let res = self.image(inner, &[source])?;
                        out.extend(
                            self.split(&res, out_mask)?.into_iter().filter(|c| sig.field(c.bits, out_sym) == want),
                        );
                        check_cap(out.len())?;
                    }
                }
                out
            }
            ProcExpr::Count { inner, min, max } => {
                if min > max {
                    return Err(Error::IllFormed(format!("count bounds {min} > {max}")));
                }
                let mut cur = input.to_vec();
                let mut acc = if *min == 0 { cur.clone() } else { Vec::new() };
                for k in 1..=*max {
                    cur = self.image(inner, &cur)?;
                    if k >= *min {
                        acc.extend(cur.iter().copied());
                    }
                }
                acc
            }
            ProcExpr::ConstTest { var, value, positive } => {
                let sym = self.val.symbol_of(var)?;
                let field = value.resolve(sig.domain(), sig.vocab().arity(sym))?.to_field(sig.domain().len());
                self.split(input, sig.mask(sym))?
                    .into_iter()
                    .filter(|c| (sig.field(c.bits, sym) == field) == *positive)
                    .collect()
            }
            ProcExpr::Reverse(x) => {
                let flipped = Rc::new(x.flipped());
                self.arena.push(flipped.clone());
                self.image(&flipped, input)?
            }
            ProcExpr::Complement(_)
            | ProcExpr::Var(_)
            | ProcExpr::Lfp { .. }
            | ProcExpr::Down(_)
            | ProcExpr::Up(_)
            | ProcExpr::Neg(_)
            | ProcExpr::TestEq(_)
            | ProcExpr::TestNeq(_)
            | ProcExpr::StateTest(_) => {
                return Err(Error::Unsupported(format!("successor cubes of {a}")));
            }
        };
        let out = dedup(out);
        check_cap(out.len())?;
        Ok(out)
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n > CUBE_CAP {
        return Err(Error::CapExceeded { bits: n.ilog2() as usize, cap: CUBE_CAP.ilog2() as usize });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::ast::Dir;
    use crate::dynamic::eval::eval_dyn;
    use crate::flat::ast::{ConstRelation, Operand};
    use crate::module::AtomicModule;
    use crate::structure::{Domain, Signature, Universe, Vocabulary, DEFAULT_CAP};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn setup() -> (Valuation, Universe) {
        let sig = Signature::new(
            Domain::new(["a", "b"]).unwrap(),
            Vocabulary::new([("P", 1), ("Q", 1), ("R", 1)]).unwrap(),
        )
        .unwrap();
        let u = Universe::new(sig.clone(), DEFAULT_CAP).unwrap();
        let one = |n: &str, b| AtomicModule::builtin(n, vec![("X".into(), 1)], b).unwrap();
        let two = |n: &str, b| AtomicModule::builtin(n, vec![("X".into(), 1), ("Y".into(), 1)], b).unwrap();
        let copy = AtomicModule::extensional(
            "Copy",
            vec![("X".into(), 1), ("Y".into(), 1)],
            (0u128..4)
                .map(|f| {
                    let r = crate::structure::RelationValue::from_field(1, 2, f);
                    vec![r.clone(), r]
                })
                .collect(),
            2,
        )
        .unwrap();
        let val = Valuation::new(sig)
            .with_module(one("Full", Builtin::Full))
            .with_module(one("Single", Builtin::Singleton))
            .with_module(one("Any", Builtin::Any))
            .with_module(two("NonEmpty2", Builtin::NonEmpty))
            .with_module(copy);
        (val, u)
    }

    fn arb_proc() -> impl Strategy<Value = ProcExpr> {
        let var = || prop::sample::select(vec!["P", "Q", "R"]);
        let dir = || prop::sample::select(vec![Dir::In, Dir::Out]);
        let leaf = prop_oneof![
            Just(ProcExpr::Bottom),
            Just(ProcExpr::Diag),
            (var(), prop::sample::select(vec!["Full", "Single", "Any"])).prop_map(|(v, m)| ProcExpr::test(m, [v])),
            (var(), dir(), prop::sample::select(vec!["Full", "Single", "Any"]))
                .prop_map(|(v, d, m)| ProcExpr::action(m, [(v, d)])),
            (var(), dir(), var(), dir(), prop::sample::select(vec!["NonEmpty2", "Copy"]))
                .prop_filter("distinct", |(a, _, b, _, _)| a != b)
                .prop_map(|(a, da, b, db, m)| ProcExpr::action(m, [(a, da), (b, db)])),
            (var(), any::<bool>(), any::<bool>()).prop_map(|(v, t, pos)| ProcExpr::ConstTest {
                var: v.into(),
                value: if t { ConstRelation::new([["a"]]) } else { ConstRelation::new(Vec::<Vec<String>>::new()) },
                positive: pos,
            }),
        ];
        leaf.prop_recursive(3, 16, 2, move |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| ProcExpr::union(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| ProcExpr::compose(a, b)),
                (inner.clone(), var()).prop_map(|(a, v)| ProcExpr::project([v], a)),
                (inner.clone(), var(), var())
                    .prop_map(|(a, x, y)| ProcExpr::select(Operand::Var(x.into()), Operand::Var(y.into()), a)),
                (inner.clone(), 0usize..2, 0usize..2).prop_map(|(a, x, y)| ProcExpr::count(a, x.min(y), x.max(y))),
                inner.prop_map(ProcExpr::reverse),
            ]
        })
    }

    proptest! {
        #[test]
        fn cube_image_matches_explicit(a in arb_proc(), start in 0usize..64, frozen_sym in 0usize..4) {
            let (val, u) = setup();
            let sig = val.sig().clone();
            let start = start % u.size();
            let explicit = match eval_dyn(&a, &val, &u) {
                Ok(e) => e,
                Err(Error::IllegalSelect(_)) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            // Frozen slots restrict both sides to the slice through `start`.
            let frozen = if frozen_sym < 3 { sig.mask(frozen_sym) } else { 0 };
            let base = u.bits_at(start);
            let slice = Universe::slice(sig.clone(), base, frozen, DEFAULT_CAP).unwrap();
            let sliced = eval_dyn(&a, &val, &slice).unwrap();
            let mut img = ImageEvaluator::new(&val, frozen);
            let cubes = img.successors(&a, base).unwrap();
            let got: BTreeSet<u128> = cubes.iter().flat_map(|c| c.members(sig.all_mask())).collect();
            let i = slice.index_of_bits(base).unwrap();
            let want: BTreeSet<u128> = sliced.successors(i).iter().map(|&j| slice.bits_at(j as usize)).collect();
            prop_assert_eq!(&got, &want);
            if frozen == 0 {
                let full: BTreeSet<u128> = explicit.successors(start).iter().map(|&j| j as u128).collect();
                prop_assert_eq!(got, full);
            }
        }
    }
}
