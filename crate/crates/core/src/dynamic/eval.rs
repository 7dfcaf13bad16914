use std::collections::{HashMap, HashSet};

use crate::dynamic::ast::{Dir, ProcExpr};
use crate::dynamic::edges::EdgeSet;
use crate::error::{Error, Result};
use crate::eval::{least_fixpoint, resolve_selection, EvalStats, Evaluator, SelectOperands};
use crate::flat::ast::Operand;
use crate::module::{Binding, Valuation};
use crate::structure::{SymbolId, Universe};

/// Widest output part an action may enumerate, in slots.
pub const MAX_OUTPUT_SLOTS: usize = 24;

/// `⟦α⟧` as a relation on `u`.
pub fn eval_dyn(a: &ProcExpr, val: &Valuation, u: &Universe) -> Result<EdgeSet> {
    Evaluator::new(val, u)?.proc(a)
}

pub fn eval_dyn_with_stats(
    a: &ProcExpr,
    val: &Valuation,
    u: &Universe,
) -> Result<(EdgeSet, EvalStats)> {
    let start = std::time::Instant::now();
    let mut ev = Evaluator::new(val, u)?;
    let edges = ev.proc(a)?;
    let mut stats = ev.into_stats();
    stats.edge_counts.insert(a.to_string(), edges.len());
    stats.wall_time = start.elapsed();
    Ok((edges, stats))
}

/// Which selection readings apply, given the operands' membership in the
/// input and output vocabularies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SelectCases {
    /// Compare on the source state.
    pub on_source: bool,
    /// Compare on the target state.
    pub on_target: bool,
    /// Copy an output into an input: `Some(true)` when the left operand is
    /// the input.
    pub feedback: Option<bool>,
}

pub(crate) fn select_cases(lhs: &Operand, rhs: &Operand, inner: &ProcExpr) -> Result<SelectCases> {
    let (sigma, eps) = inner.io_vocab();
    let in_sigma = |o: &Operand| o.var().is_none_or(|v| sigma.contains(v));
    let in_eps = |o: &Operand| o.var().is_none_or(|v| eps.contains(v));
    let var_in = |o: &Operand, s: &std::collections::BTreeSet<String>| o.var().is_some_and(|v| s.contains(v));
    let feedback = if var_in(lhs, &sigma) && var_in(rhs, &eps) {
        Some(true)
    } else if var_in(rhs, &sigma) && var_in(lhs, &eps) {
        Some(false)
    } else {
        None
    };
    let cases = SelectCases {
        on_source: in_sigma(lhs) && in_sigma(rhs),
        on_target: in_eps(lhs) && in_eps(rhs),
        feedback,
    };
    if !cases.on_source && !cases.on_target && cases.feedback.is_none() {
        return Err(Error::IllegalSelect(format!("{lhs:?} and {rhs:?}")));
    }
    Ok(cases)
}

/// Positions of the set bits of `mask`, most significant first.
pub(crate) fn bit_positions(mask: u128) -> Vec<u32> {
    (0..128u32).rev().filter(|p| mask >> p & 1 == 1).collect()
}

/// Spreads the low bits of `value` over `positions` (first position gets the top bit).
pub(crate) fn deposit(value: u64, positions: &[u32]) -> u128 {
    let k = positions.len();
    positions
        .iter()
        .enumerate()
        .fold(0u128, |acc, (j, &p)| acc | (((value >> (k - 1 - j)) & 1) as u128) << p)
}

/// Resolved action: argument symbols and the input/output slot masks.
pub(crate) struct ActionShape {
    pub syms: Vec<SymbolId>,
    pub in_mask: u128,
    pub out_mask: u128,
    pub out_positions: Vec<u32>,
}

pub(crate) fn action_shape(val: &Valuation, module: &str, args: &[(String, Dir)]) -> Result<ActionShape> {
    let names: Vec<String> = args.iter().map(|(a, _)| a.clone()).collect();
    let syms = val.resolve_atom(module, &names)?;
    let sig = val.sig();
    let out_mask = sig.mask_of(syms.iter().zip(args).filter(|(_, (_, d))| *d == Dir::Out).map(|(s, _)| *s));
    let in_mask = sig.mask_of(syms.iter().copied()) & !out_mask;
    let out_positions = bit_positions(out_mask);
    if out_positions.len() > MAX_OUTPUT_SLOTS {
        return Err(Error::CapExceeded { bits: out_positions.len(), cap: MAX_OUTPUT_SLOTS });
    }
    Ok(ActionShape { syms, in_mask, out_mask, out_positions })
}

impl ActionShape {
    /// Output parts `d` (within `out_mask`) such that `key | d` is accepted.
    pub fn outputs(&self, val: &Valuation, module: &str, key: u128) -> Result<Vec<u128>> {
        let m = val.module(module)?;
        let sig = val.sig();
        Ok((0..1u64 << self.out_positions.len())
            .map(|o| deposit(o, &self.out_positions))
            .filter(|&d| m.contains_bits(sig, &self.syms, key | d))
            .collect())
    }
}

impl Evaluator<'_> {
    pub fn proc(&mut self, a: &ProcExpr) -> Result<EdgeSet> {
        let u = self.universe;
        let n = u.size();
        let sig = u.sig().clone();
        match a {
            ProcExpr::Bottom => Ok(EdgeSet::empty(n)),
            ProcExpr::Diag => Ok(EdgeSet::diagonal(n)),
            ProcExpr::Test { module, args } => {
                let syms = self.val.resolve_atom(module, args)?;
                let m = self.val.module(module)?;
                Ok(EdgeSet::from_successors(
                    (0..n)
                        .map(|i| {
                            if m.contains_bits(&sig, &syms, u.bits_at(i)) {
                                vec![i as u32]
                            } else {
                                vec![]
                            }
                        })
                        .collect(),
                ))
            }
            ProcExpr::Action { module, args } => {
                let shape = action_shape(self.val, module, args)?;
                let mut memo: HashMap<u128, Vec<u128>> = HashMap::new();
                let mut succ = Vec::with_capacity(n);
                for i in 0..n {
                    let bits = u.bits_at(i);
                    let key = bits & shape.in_mask;
                    if let std::collections::hash_map::Entry::Vacant(slot) = memo.entry(key) {
                        slot.insert(shape.outputs(self.val, module, key)?);
                    }
                    succ.push(
                        memo[&key]
                            .iter()
                            .filter_map(|d| u.index_of_bits((bits & !shape.out_mask) | d))
                            .map(|j| j as u32)
                            .collect(),
                    );
                }
                Ok(EdgeSet::from_successors(succ))
            }
            ProcExpr::Var(z) => match self.lookup(z) {
                Some(Binding::Edges(e)) if e.universe_len() == n => Ok(e.clone()),
                Some(_) => Err(Error::ShapeMismatch(z.clone())),
                None => Err(Error::UnboundModuleVar(z.clone())),
            },
            ProcExpr::Union(x, y) => Ok(self.proc(x)?.union(&self.proc(y)?)),
            ProcExpr::Complement(x) => self.proc(x)?.complement(),
            ProcExpr::Project { keep, inner } => {
                let inner_edges = self.proc(inner)?;
                let syms = keep.iter().map(|v| self.val.symbol_of(v)).collect::<Result<Vec<_>>>()?;
                let mask = sig.mask_of(syms);
                let mut classes: HashMap<u128, Vec<u32>> = HashMap::new();
                for i in 0..n {
                    classes.entry(u.bits_at(i) & mask).or_default().push(i as u32);
                }
                let keys: HashSet<(u128, u128)> = inner_edges
                    .iter()
                    .map(|(i, j)| (u.bits_at(i) & mask, u.bits_at(j) & mask))
                    .collect();
                let mut succ = vec![Vec::new(); n];
                for (k1, k2) in keys {
                    for &a in &classes[&k1] {
                        succ[a as usize].extend_from_slice(&classes[&k2]);
                    }
                }
                Ok(EdgeSet::from_successors(succ))
            }
            ProcExpr::Select { lhs, rhs, inner } => {
                let cases = select_cases(lhs, rhs, inner)?;
                let ops = resolve_selection(self.val, lhs, rhs)?;
                let inner_edges = self.proc(inner)?;
                let mut out = EdgeSet::empty(n);
                if cases.on_source {
                    out = out.union(&EdgeSet::from_pairs(
                        n,
                        inner_edges.iter().filter(|&(i, _)| ops.holds(&sig, u.bits_at(i))),
                    ));
                }
                if cases.on_target {
                    out = out.union(&EdgeSet::from_pairs(
                        n,
                        inner_edges.iter().filter(|&(_, j)| ops.holds(&sig, u.bits_at(j))),
                    ));
                }
                if let Some(left_is_input) = cases.feedback {
                    let (input, output) = if left_is_input { (ops.lhs, ops.rhs) } else { (ops.rhs, ops.lhs) };
                    let input_sym = input.0.expect("feedback operands are variables");
                    let pairs: Vec<(usize, usize)> = inner_edges
                        .iter()
                        .filter_map(|(c, j)| {
                            let value = SelectOperands::value(&sig, output, u.bits_at(j));
                            let b1 = sig.set_field(u.bits_at(c), input_sym, value);
                            u.index_of_bits(b1).map(|i| (i, j))
                        })
                        .collect();
                    out = out.union(&EdgeSet::from_pairs(n, pairs));
                }
                Ok(out)
            }
            ProcExpr::Lfp { var, body } => {
                let (edges, steps) = least_fixpoint(EdgeSet::empty(n), |approx| {
                    self.with_binding(var, Binding::Edges(approx.clone()), |ev| ev.proc(body))
                })?;
                self.record_iterations(a.to_string(), steps);
                Ok(edges)
            }
            ProcExpr::Down(x) => Ok(EdgeSet::diagonal_on(&self.proc(x)?.domain())),
            ProcExpr::Up(x) => Ok(EdgeSet::diagonal_on(&self.proc(x)?.range())),
            ProcExpr::Neg(x) => Ok(EdgeSet::diagonal_on(&self.proc(x)?.domain().complement())),
            ProcExpr::Compose(x, y) => Ok(self.proc(x)?.compose(&self.proc(y)?)),
            ProcExpr::Count { inner, min, max } => {
                if min > max {
                    return Err(Error::IllFormed(format!("count bounds {min} > {max}")));
                }
                let step = self.proc(inner)?;
                let mut power = EdgeSet::diagonal(n);
                let mut acc = if *min == 0 { power.clone() } else { EdgeSet::empty(n) };
                for k in 1..=*max {
                    power = power.compose(&step);
                    if k >= *min {
                        acc = acc.union(&power);
                    }
                }
                Ok(acc)
            }
            ProcExpr::Reverse(x) => self.proc(&x.flipped()),
            ProcExpr::TestEq(x) => Ok(self.proc(x)?.restrict_diagonal()),
            ProcExpr::TestNeq(x) => {
                let e = self.proc(x)?;
                Ok(e.difference(&e.restrict_diagonal()))
            }
            ProcExpr::ConstTest { var, value, positive } => {
                let sym = self.val.symbol_of(var)?;
                let field = value.resolve(sig.domain(), sig.vocab().arity(sym))?.to_field(sig.domain().len());
                Ok(EdgeSet::from_successors(
                    (0..n)
                        .map(|i| {
                            if (sig.field(u.bits_at(i), sym) == field) == *positive {
                                vec![i as u32]
                            } else {
                                vec![]
                            }
                        })
                        .collect(),
                ))
            }
            ProcExpr::StateTest(phi) => Ok(EdgeSet::diagonal_on(&self.state(phi)?)),
        }
    }
}
