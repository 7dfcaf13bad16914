//! First-order query evaluation as witness existence: each first-order
//! variable becomes a unary relational variable holding a singleton.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::flat::ast::{FlatExpr, Operand};
use crate::module::{AtomicModule, Builtin, Valuation};
use crate::structure::{ElemId, RelationValue, Signature, Structure, Vocabulary};
use crate::tasks::ev;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoFormula {
    Rel(String, Vec<String>),
    Eq(String, String),
    Not(Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    Exists(String, Box<FoFormula>),
}

impl FoFormula {
    pub fn rel<S: Into<String>>(r: &str, args: impl IntoIterator<Item = S>) -> Self {
        FoFormula::Rel(r.to_string(), args.into_iter().map(Into::into).collect())
    }

    pub fn eq(x: &str, y: &str) -> Self {
        FoFormula::Eq(x.to_string(), y.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: FoFormula) -> Self {
        FoFormula::Not(Box::new(a))
    }

    pub fn and(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FoFormula, b: FoFormula) -> Self {
        FoFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, a: FoFormula) -> Self {
        FoFormula::Exists(x.to_string(), Box::new(a))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            FoFormula::Rel(_, xs) => xs.iter().cloned().collect(),
            FoFormula::Eq(x, y) => BTreeSet::from([x.clone(), y.clone()]),
            FoFormula::Not(a) => a.free_vars(),
            FoFormula::And(a, b) | FoFormula::Or(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            FoFormula::Exists(x, a) => {
                let mut s = a.free_vars();
                s.remove(x);
                s
            }
        }
    }

    pub fn all_vars(&self) -> BTreeSet<String> {
        match self {
            FoFormula::Exists(x, a) => {
                let mut s = a.all_vars();
                s.insert(x.clone());
                s
            }
            FoFormula::Not(a) => a.all_vars(),
            FoFormula::And(a, b) | FoFormula::Or(a, b) => {
                let mut s = a.all_vars();
                s.extend(b.all_vars());
                s
            }
            _ => self.free_vars(),
        }
    }

    fn relations(&self, out: &mut BTreeSet<(String, usize)>) {
        match self {
            FoFormula::Rel(r, xs) => {
                out.insert((r.clone(), xs.len()));
            }
            FoFormula::Eq(..) => {}
            FoFormula::Not(a) | FoFormula::Exists(_, a) => a.relations(out),
            FoFormula::And(a, b) | FoFormula::Or(a, b) => {
                a.relations(out);
                b.relations(out);
            }
        }
    }
}

/// Encoded query: a witness for the free variables exists exactly for the answers.
#[derive(Debug, Clone)]
pub struct QeInstance {
    pub formula: FlatExpr,
    pub valuation: Valuation,
    /// The database, over the extended vocabulary.
    pub input: Structure,
    /// Database relation names.
    pub sigma: BTreeSet<String>,
    /// Free first-order variables, in answer-tuple order.
    pub free_vars: Vec<String>,
}

const SINGLE: &str = "single";

fn single(x: &str) -> FlatExpr {
    FlatExpr::atom(SINGLE, [x])
}

fn member_module(r: &str) -> String {
    format!("member_{r}")
}

fn singletons(vars: &BTreeSet<String>) -> Option<FlatExpr> {
    vars.iter().map(|x| single(x)).reduce(FlatExpr::intersection)
}

fn encode(phi: &FoFormula) -> FlatExpr {
    match phi {
        FoFormula::Rel(r, xs) => {
            let mut args = vec![r.clone()];
            args.extend(xs.iter().cloned());
            FlatExpr::atom(&member_module(r), args)
        }
        FoFormula::Eq(x, y) => FlatExpr::select(
            Operand::Var(x.clone()),
            Operand::Var(y.clone()),
            FlatExpr::intersection(single(x), single(y)),
        ),
        FoFormula::Not(a) => {
            let neg = FlatExpr::complement(encode(a));
            match singletons(&a.free_vars()) {
                Some(s) => FlatExpr::intersection(neg, s),
                None => neg,
            }
        }
        FoFormula::And(a, b) => FlatExpr::intersection(encode(a), encode(b)),
        FoFormula::Or(a, b) => FlatExpr::union(encode(a), encode(b)),
        FoFormula::Exists(x, a) => {
            let inner = FlatExpr::intersection(encode(a), single(x));
            let mut keep = inner.occurring_vars();
            keep.remove(x);
            FlatExpr::project(keep, inner)
        }
    }
}

pub fn qe_encode(query: &FoFormula, db: &Structure) -> Result<QeInstance> {
    let db_sig = db.sig();
    let mut used = BTreeSet::new();
    query.relations(&mut used);
    for (r, arity) in &used {
        match db_sig.vocab().index_of(r) {
            None => return Err(Error::UnknownSymbol(r.clone())),
            Some(s) if db_sig.vocab().arity(s) != *arity => {
                return Err(Error::ArityMismatch(format!("`{r}` used with {arity} arguments")))
            }
            _ => {}
        }
    }
    let fo_vars = query.all_vars();
    let mut symbols: Vec<(String, usize)> = db_sig.vocab().symbols().to_vec();
    for x in &fo_vars {
        if db_sig.vocab().index_of(x).is_some() {
            return Err(Error::DuplicateName(x.clone()));
        }
        symbols.push((x.clone(), 1));
    }
    let sig = Signature::new(db_sig.domain().clone(), Vocabulary::new(symbols)?)?;
    let mut val = Valuation::new(sig.clone())
        .with_module(AtomicModule::builtin(SINGLE, vec![("X".into(), 1)], Builtin::Singleton)?);
    for (r, arity) in &used {
        let mut vvoc = vec![("R".to_string(), *arity)];
        vvoc.extend((1..=*arity).map(|i| (format!("x{i}"), 1)));
        val.add_module(AtomicModule::builtin(&member_module(r), vvoc, Builtin::Member)?);
    }
    let mut input = Structure::empty(sig);
    for (name, _) in db_sig.vocab().symbols() {
        input = input.with_relation(name, &db.relation(name)?)?;
    }
    let free = query.free_vars();
    let body = encode(query);
    let formula = match singletons(&free) {
        Some(s) => FlatExpr::intersection(body, s),
        None => body,
    };
    Ok(QeInstance {
        formula,
        valuation: val,
        input,
        sigma: db_sig.vocab().symbols().iter().map(|(s, _)| s.clone()).collect(),
        free_vars: free.into_iter().collect(),
    })
}

/// Answer tuples, found by trying every value of the free variables as a
/// witness; sorted.
pub fn qe_answers(inst: &QeInstance) -> Result<Vec<Vec<ElemId>>> {
    let n = inst.input.sig().domain().len();
    let k = inst.free_vars.len();
    if n * k > 24 {
        return Err(Error::CapExceeded { bits: n * k, cap: 24 });
    }
    let mut answers = Vec::new();
    for code in 0u64..1 << (n * k) {
        let outputs: BTreeMap<String, RelationValue> = inst
            .free_vars
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), RelationValue::from_field(1, n, ((code >> (i * n)) & ((1 << n) - 1)) as u128)))
            .collect();
        if ev(&inst.formula, &inst.sigma, &inst.input, &outputs, &inst.valuation)?.is_some() {
            let mut tuple = Vec::with_capacity(k);
            for x in &inst.free_vars {
                let rel = &outputs[x];
                if rel.len() != 1 {
                    return Err(Error::NonSingletonEncoding(x.clone()));
                }
                tuple.push(rel.tuples().next().expect("singleton")[0]);
            }
            answers.push(tuple);
        }
    }
    answers.sort();
    Ok(answers)
}
