//! Decision and search tasks over flat expressions and their modal
//! counterparts.

pub mod equiv;
pub mod qe;
pub mod temporal;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::flat::ast::{free_relational_vars, FlatExpr};
use crate::flat::search::FlatSearch;
use crate::module::Valuation;
use crate::structure::{Domain, RelationValue, Signature, Structure};

pub use equiv::{derive_process, equivalence_check, io_assignments, EquivalenceReport, IoAssignment, Route};
pub use qe::{qe_answers, qe_encode, FoFormula, QeInstance};
pub use temporal::{reach, temp_mc, temp_mc_search, temp_sat_prop};

/// A flat expression with designated inputs, an input structure and the
/// desired values of the externally visible outputs.
#[derive(Debug, Clone)]
pub struct TaskInstance {
    pub formula: FlatExpr,
    pub sigma: BTreeSet<String>,
    pub input: Structure,
    pub outputs: BTreeMap<String, RelationValue>,
    pub valuation: Valuation,
}

pub(crate) fn check_signature(a: &Structure, val: &Valuation) -> Result<()> {
    if **a.sig() != **val.sig() {
        return Err(Error::IncompleteStructure);
    }
    Ok(())
}

pub(crate) fn mask_of_vars<'a>(val: &Valuation, vars: impl IntoIterator<Item = &'a String>) -> Result<u128> {
    let syms = vars.into_iter().map(|v| val.symbol_of(v)).collect::<Result<Vec<_>>>()?;
    Ok(val.sig().mask_of(syms))
}

/// Model checking: `A ∈ ⟦e⟧`.
pub fn mc(e: &FlatExpr, a: &Structure, val: &Valuation) -> Result<bool> {
    check_signature(a, val)?;
    FlatSearch::new(val).holds(e, a.bits())
}

/// Model expansion: all `B ∈ ⟦e⟧` agreeing with `A` on the symbols of `σ`,
/// in canonical order.
pub fn mx(e: &FlatExpr, sigma: &BTreeSet<String>, a: &Structure, val: &Valuation) -> Result<Vec<Structure>> {
    check_signature(a, val)?;
    let fixed = mask_of_vars(val, sigma)?;
    let mut found = Vec::new();
    FlatSearch::new(val).expansions(e, a.bits(), fixed, &mut |b| {
        found.push(b);
        true
    })?;
    found.sort_unstable();
    Ok(found.into_iter().map(|b| Structure::from_bits(a.sig().clone(), b)).collect())
}

/// Domain of size `k`: a prefix of `base`, padded with fresh names.
pub(crate) fn domain_of_size(base: &Domain, k: usize) -> Result<Domain> {
    let mut names: Vec<String> = base.elements().iter().take(k).cloned().collect();
    let mut i = 1;
    while names.len() < k {
        let candidate = format!("n{i}");
        if !base.elements().contains(&candidate) {
            names.push(candidate);
        }
        i += 1;
    }
    Domain::new(names)
}

/// Some model of `e` over a domain of at most `domain_cap` elements.
/// Domains are prefixes of the valuation's domain, extended with fresh names;
/// sizes too small to contain the constants of `e` are skipped.
pub fn sat_bounded(e: &FlatExpr, val: &Valuation, domain_cap: usize) -> Result<Option<Structure>> {
    for k in 1..=domain_cap {
        let sig = Signature::new(domain_of_size(val.sig().domain(), k)?, val.sig().vocab().clone())?;
        let val_k = val.with_sig(sig.clone());
        match FlatSearch::new(&val_k).first_expansion(e, 0, 0) {
            Ok(Some(b)) => return Ok(Some(Structure::from_bits(sig, b))),
            Ok(None) => {}
            Err(Error::UnknownElement(_)) if k < domain_cap => {}
            Err(err) => return Err(err),
        }
    }
    Ok(None)
}

/// Checks that `outputs` interprets exactly the free non-input variables.
pub(crate) fn check_outputs(
    e: &FlatExpr,
    sigma: &BTreeSet<String>,
    outputs: &BTreeMap<String, RelationValue>,
    val: &Valuation,
) -> Result<()> {
    let expected: BTreeSet<String> = free_relational_vars(e).difference(sigma).cloned().collect();
    let given: BTreeSet<String> = outputs.keys().cloned().collect();
    if expected != given {
        return Err(Error::IllFormed(format!(
            "outputs must interpret exactly {expected:?}, got {given:?}"
        )));
    }
    for (var, rel) in outputs {
        let sym = val.symbol_of(var)?;
        let arity = val.sig().vocab().arity(sym);
        if rel.arity() != arity {
            return Err(Error::ArityMismatch(format!("`{var}` has arity {arity}, value has arity {}", rel.arity())));
        }
        rel.check_domain(val.sig().domain().len())?;
    }
    Ok(())
}

/// Input with the output values written in.
pub(crate) fn with_outputs(a: &Structure, outputs: &BTreeMap<String, RelationValue>, val: &Valuation) -> Result<u128> {
    let sig = a.sig();
    let n = sig.domain().len();
    outputs.iter().try_fold(a.bits(), |bits, (var, rel)| Ok(sig.set_field(bits, val.symbol_of(var)?, rel.to_field(n))))
}

/// Existence of a witness: some `B ∈ ⟦e⟧` agreeing with `A` on `σ` and with
/// the given output values, with the internal (non-free) variables chosen freely.
pub fn ev(
    e: &FlatExpr,
    sigma: &BTreeSet<String>,
    a: &Structure,
    outputs: &BTreeMap<String, RelationValue>,
    val: &Valuation,
) -> Result<Option<Structure>> {
    check_signature(a, val)?;
    check_outputs(e, sigma, outputs, val)?;
    let free = free_relational_vars(e);
    let internal: BTreeSet<String> = e.occurring_vars().difference(&free).cloned().collect();
    let internal_mask =
        mask_of_vars(val, &internal)? & !mask_of_vars(val, free.iter())? & !mask_of_vars(val, sigma)?;
    let base = with_outputs(a, outputs, val)?;
    let fixed = val.sig().all_mask() & !internal_mask;
    Ok(FlatSearch::new(val)
        .first_expansion(e, base, fixed)?
        .map(|b| Structure::from_bits(a.sig().clone(), b)))
}
