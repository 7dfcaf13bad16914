//! Model checking, satisfiability and reachability for state formulas.

use std::collections::BTreeMap;

use crate::dynamic::{eval_dyn, ProcExpr};
use crate::error::{Error, Result};
use crate::lmumu::{eval_state, StateExpr};
use crate::module::{ModuleKind, Valuation};
use crate::structure::{RelationValue, Signature, Structure, Universe, DEFAULT_CAP};
use crate::tasks::{check_signature, domain_of_size};

/// `A ∈ ⟦φ⟧` within the universe `u`.
pub fn temp_mc(phi: &StateExpr, a: &Structure, val: &Valuation, u: &Universe) -> Result<bool> {
    check_signature(a, val)?;
    let i = u.index_of(a).ok_or(Error::IncompleteStructure)?;
    Ok(eval_state(phi, val, u)?.contains(i))
}

/// Every structure of `u` satisfying `φ`, in canonical order.
pub fn temp_mc_search(phi: &StateExpr, val: &Valuation, u: &Universe) -> Result<Vec<Structure>> {
    Ok(u.structures(&eval_state(phi, val, u)?))
}

fn check_prop_proc(a: &ProcExpr, val: &Valuation) -> Result<()> {
    let mut err = None;
    a.visit(&mut |e| {
        if err.is_some() {
            return;
        }
        let bad = match e {
            ProcExpr::Bottom
            | ProcExpr::Diag
            | ProcExpr::Var(_)
            | ProcExpr::Union(..)
            | ProcExpr::Compose(..)
            | ProcExpr::Lfp { .. }
            | ProcExpr::Down(_)
            | ProcExpr::Neg(_)
            | ProcExpr::Count { .. }
            | ProcExpr::Reverse(_) => None,
            ProcExpr::Test { module, args } => check_prop_atom(module, args.iter(), val).err(),
            ProcExpr::Action { module, args } => check_prop_atom(module, args.iter().map(|(a, _)| a), val).err(),
            ProcExpr::StateTest(phi) => check_prop_state(phi, val).err(),
            other => Some(Error::NonPropositionalFormula(format!("operator in {other}"))),
        };
        err = bad;
    });
    err.map_or(Ok(()), Err)
}

fn check_prop_atom<'a>(module: &str, args: impl Iterator<Item = &'a String>, val: &Valuation) -> Result<()> {
    match val.module(module)?.kind() {
        ModuleKind::Builtin(b) if b.is_propositional() => {}
        _ => return Err(Error::NonPropositionalFormula(format!("module {module} is not propositional"))),
    }
    for a in args {
        let sym = val.symbol_of(a)?;
        if val.sig().vocab().arity(sym) != 1 {
            return Err(Error::NonPropositionalFormula(format!("`{a}` is not unary")));
        }
    }
    Ok(())
}

fn check_prop_state(phi: &StateExpr, val: &Valuation) -> Result<()> {
    match phi {
        StateExpr::Prop { module, args } => check_prop_atom(module, args.iter(), val),
        StateExpr::SetVar(_) => Ok(()),
        StateExpr::Or(a, b) | StateExpr::And(a, b) => {
            check_prop_state(a, val)?;
            check_prop_state(b, val)
        }
        StateExpr::Not(a) | StateExpr::Lfp { body: a, .. } => check_prop_state(a, val),
        StateExpr::Diamond(p, a) | StateExpr::Necessity(p, a) => {
            check_prop_proc(p, val)?;
            check_prop_state(a, val)
        }
    }
}

/// Satisfiability of a propositional formula. Over unary symbols and
/// fullness-only modules every structure is indistinguishable from a
/// one-element one, so the one-element universe decides it.
pub fn temp_sat_prop(phi: &StateExpr, val: &Valuation) -> Result<Option<Structure>> {
    check_prop_state(phi, val)?;
    let sig = Signature::new(domain_of_size(val.sig().domain(), 1)?, val.sig().vocab().clone())?;
    let val1 = val.with_sig(sig.clone());
    let u = Universe::new(sig, DEFAULT_CAP)?;
    let set = eval_state(phi, &val1, &u)?;
    let first = set.iter().next();
    Ok(first.map(|i| u.structure_at(i)))
}

/// Whether some `α`-successor of `A` interprets the goal variables as given.
pub fn reach(
    a: &ProcExpr,
    start: &Structure,
    goal: &BTreeMap<String, RelationValue>,
    val: &Valuation,
    u: &Universe,
) -> Result<bool> {
    check_signature(start, val)?;
    let i = u.index_of(start).ok_or(Error::IncompleteStructure)?;
    let sig = val.sig();
    let n = sig.domain().len();
    let wanted = goal
        .iter()
        .map(|(var, rel)| Ok((val.symbol_of(var)?, rel.to_field(n))))
        .collect::<Result<Vec<_>>>()?;
    let edges = eval_dyn(a, val, u)?;
    Ok(edges.successors(i).iter().any(|&j| {
        let bits = u.bits_at(j as usize);
        wanted.iter().all(|&(sym, field)| sig.field(bits, sym) == field)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{full_p, pq, set_p};

    #[test]
    fn propositional_satisfiability() {
        let (val, _) = pq();
        let b = temp_sat_prop(&StateExpr::diamond(set_p(), full_p()), &val).unwrap().unwrap();
        assert_eq!(b.sig().domain().len(), 1);
        assert!(temp_sat_prop(&StateExpr::and(full_p(), StateExpr::not(full_p())), &val).unwrap().is_none());
        let two = ProcExpr::action("Any2", [("P", crate::dynamic::Dir::Out), ("Q", crate::dynamic::Dir::In)]);
        assert!(temp_sat_prop(&StateExpr::diamond(two, full_p()), &val).is_ok());
        let sel = ProcExpr::project(["P"], set_p());
        assert!(matches!(
            temp_sat_prop(&StateExpr::diamond(sel, full_p()), &val),
            Err(Error::NonPropositionalFormula(_))
        ));
    }

    #[test]
    fn search_and_check_agree() {
        let (val, u) = pq();
        let found = temp_mc_search(&full_p(), &val, &u).unwrap();
        assert_eq!(found.len(), 4);
        assert!(found.iter().all(|b| temp_mc(&full_p(), b, &val, &u).unwrap()));
    }
}
